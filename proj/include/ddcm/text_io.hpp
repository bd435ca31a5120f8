#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ddcm::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Whitespace-separated token stream over a whole file; `#` starts a comment
/// running to the end of the line. All parse failures raise MalformedFileError.
class TokenReader {
 public:
  TokenReader(std::string content, std::string source);
  static TokenReader from_file(const std::filesystem::path& path);

  bool at_end() const { return pos_ >= tokens_.size(); }
  std::string_view peek() const;
  std::string next();
  double next_double();
  std::int64_t next_int();
  std::size_t next_count();
  void expect(std::string_view keyword);

  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  std::string source_;
};

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ddcm::text
