#include "ddcm/result_io.hpp"

#include "ddcm/errors.hpp"
#include "ddcm/text_io.hpp"

#include <sstream>

namespace ddcm {

namespace {

void write_vector(std::ostringstream& out, const char* key, const Vector& v) {
  out << key << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << text::format_double(v(i)) << '\n';
}

void write_list(std::ostringstream& out, const char* key, const std::vector<double>& v) {
  out << key << ' ' << v.size() << '\n';
  for (double x : v) out << text::format_double(x) << '\n';
}

Vector read_vector(text::TokenReader& in, const char* key) {
  in.expect(key);
  const auto n = in.next_count();
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = in.next_double();
  return v;
}

std::vector<double> read_list(text::TokenReader& in, const char* key) {
  in.expect(key);
  std::vector<double> v(in.next_count());
  for (auto& x : v) x = in.next_double();
  return v;
}

}  // namespace

StoredResult to_stored(const SolveResult& r, const std::string& scheme) {
  return {scheme, r.converged, r.iterations, r.data_distance, r.u, r.eta, r.z.states, r.distance_history,
          r.beta_history};
}

// ddcm-result 1
// scheme <name>
// converged <0|1>
// iterations <n>
// data_distance <d>
// u <n> / eta <n>            one value per line
// states <m> <dim>           one row per material point: strain, then stress
// distance_history <k> / beta_history <k>
void save_result(const StoredResult& r, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "ddcm-result 1\n";
  out << "scheme " << r.scheme << '\n';
  out << "converged " << (r.converged ? 1 : 0) << '\n';
  out << "iterations " << r.iterations << '\n';
  out << "data_distance " << text::format_double(r.data_distance) << '\n';
  write_vector(out, "u", r.u);
  write_vector(out, "eta", r.eta);
  const Eigen::Index dim = r.states.empty() ? 0 : r.states.front().dim();
  out << "states " << r.states.size() << ' ' << dim << '\n';
  for (const auto& s : r.states) {
    if (s.dim() != dim) throw DimensionError("material points differ in dimension");
    for (Eigen::Index i = 0; i < dim; ++i) out << text::format_double(s.strain(i)) << ' ';
    for (Eigen::Index i = 0; i < dim; ++i) out << text::format_double(s.stress(i)) << (i + 1 < dim ? " " : "");
    out << '\n';
  }
  write_list(out, "distance_history", r.distance_history);
  write_list(out, "beta_history", r.beta_history);
  text::write_file(path, out.str());
}

StoredResult load_result(const std::filesystem::path& path) {
  auto in = text::TokenReader::from_file(path);
  in.expect("ddcm-result");
  if (in.next_int() != 1) in.fail("unsupported result version");
  StoredResult r;
  in.expect("scheme");
  r.scheme = in.next();
  in.expect("converged");
  r.converged = in.next_int() != 0;
  in.expect("iterations");
  r.iterations = static_cast<int>(in.next_int());
  in.expect("data_distance");
  r.data_distance = in.next_double();
  r.u = read_vector(in, "u");
  r.eta = read_vector(in, "eta");
  in.expect("states");
  const auto m = in.next_count();
  const auto dim = static_cast<Eigen::Index>(in.next_count());
  if (dim < 1) in.fail("state dimension must be positive");
  r.states.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    Vector eps(dim), sig(dim);
    for (Eigen::Index i = 0; i < dim; ++i) eps(i) = in.next_double();
    for (Eigen::Index i = 0; i < dim; ++i) sig(i) = in.next_double();
    r.states.emplace_back(std::move(eps), std::move(sig));
  }
  r.distance_history = read_list(in, "distance_history");
  r.beta_history = read_list(in, "beta_history");
  if (!in.at_end()) in.fail("trailing content");
  return r;
}

}  // namespace ddcm
