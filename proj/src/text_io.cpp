#include "ddcm/text_io.hpp"

#include "ddcm/errors.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ddcm::text {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw Error("failed to format floating-point value");
  return std::string(buf.data(), end);
}

TokenReader::TokenReader(std::string content, std::string source) : source_(std::move(source)) {
  std::size_t i = 0;
  while (i < content.size()) {
    const char ch = content[i];
    if (ch == '#') {
      while (i < content.size() && content[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else {
      const std::size_t start = i;
      while (i < content.size() && !std::isspace(static_cast<unsigned char>(content[i])) &&
             content[i] != '#')
        ++i;
      tokens_.emplace_back(content.substr(start, i - start));
    }
  }
}

TokenReader TokenReader::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return TokenReader(ss.str(), path.string());
}

std::string_view TokenReader::peek() const {
  if (at_end()) fail("unexpected end of file");
  return tokens_[pos_];
}

std::string TokenReader::next() {
  if (at_end()) fail("unexpected end of file");
  return tokens_[pos_++];
}

double TokenReader::next_double() {
  const std::string tok = next();
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    // from_chars rejects "inf"/"nan" spellings some writers emit
    if (tok == "inf" || tok == "+inf") return HUGE_VAL;
    if (tok == "-inf") return -HUGE_VAL;
    fail("expected a number, found '" + tok + "'");
  }
  return value;
}

std::int64_t TokenReader::next_int() {
  const std::string tok = next();
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    fail("expected an integer, found '" + tok + "'");
  return value;
}

std::size_t TokenReader::next_count() {
  const std::int64_t v = next_int();
  if (v < 0) fail("expected a non-negative count");
  return static_cast<std::size_t>(v);
}

void TokenReader::expect(std::string_view keyword) {
  const std::string tok = next();
  if (tok != keyword) fail("expected '" + std::string(keyword) + "', found '" + tok + "'");
}

void TokenReader::fail(const std::string& message) const {
  throw MalformedFileError(source_ + ": " + message + " (token " + std::to_string(pos_) + ")");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace ddcm::text
