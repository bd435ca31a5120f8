#include "ddcm/studies.hpp"

#include "ddcm/errors.hpp"
#include "ddcm/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace ddcm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each call writes
// only its own output slot, so results do not depend on the schedule.
template <class Fn>
void for_each_index(std::size_t count, unsigned threads, Fn fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const auto workers = std::min<std::size_t>(threads, count);
  for (std::size_t t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

void check_sizes(const std::vector<std::size_t>& sizes, std::size_t samples) {
  if (sizes.empty()) throw InvalidArgument("study needs at least one set size");
  if (samples < 1) throw InvalidArgument("samples_per_cell must be at least 1");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] <= sizes[i - 1]) throw InvalidArgument("set sizes must be strictly increasing");
}

}  // namespace

std::string SchemeVariant::name() const {
  std::string s = scheme == Scheme::MinDist ? "min-dist" : "max-ent";
  return ten_vote ? s + "/ten-vote" : s;
}

SchemeVariant SchemeVariant::parse(const std::string& name) {
  auto base = name;
  bool tv = false;
  for (const std::string suffix : {"/ten-vote", "/classic"}) {
    if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
      tv = suffix == "/ten-vote";
      base.resize(base.size() - suffix.size());
      break;
    }
  }
  if (base == "min-dist") return {Scheme::MinDist, tv};
  if (base == "max-ent") return {Scheme::MaxEnt, tv};
  throw InvalidArgument("unknown scheme '" + name + "'");
}

Problem BenchmarkSetup::problem() const {
  return benchmark == Benchmark::Truss ? build_truss(truss) : build_plate(plate);
}

ConstitutiveLaw BenchmarkSetup::law() const {
  return benchmark == Benchmark::Truss ? truss_reference_law(truss_law) : plate_reference_law(plate_law);
}

MetricTensor BenchmarkSetup::metric() const {
  return benchmark == Benchmark::Truss ? MetricTensor::scalar(truss.youngs_modulus)
                                       : MetricTensor::plane_strain(plate.youngs_modulus, plate.poisson);
}

DataGenSpec BenchmarkSetup::data_spec(std::size_t count, double noise, std::uint64_t seed) const {
  DataGenSpec d{law(), metric()};
  d.count = count;
  d.noise_stddev_fraction = noise;
  d.rng_seed = seed;
  if (benchmark == Benchmark::Truss) {
    d.sampling = StrainSampling::Uniform;
    d.strain_bound = strain_scale.value_or(0.025);
  } else {
    d.sampling = StrainSampling::Normal;
    d.strain_bound = strain_scale.value_or(0.005);
  }
  return d;
}

int BenchmarkSetup::manifold_dim() const { return benchmark == Benchmark::Truss ? 1 : 3; }

std::uint64_t cell_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer applied to a running combination
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ b);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("slope fit needs equal-length inputs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return kNaN;
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (den == 0.0) return kNaN;
  return (dn * sxy - sx * sy) / den;
}

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ConvergenceReport run_convergence_study(const ConvergenceStudySpec& spec) {
  check_sizes(spec.set_sizes, spec.samples_per_cell);
  if (spec.schemes.empty()) throw InvalidArgument("study needs at least one scheme");

  const Problem problem = spec.setup.problem();
  const ConstitutiveLaw law = spec.setup.law();
  const GlobalState reference = newton_reference_solve(problem, law).z;
  const bool need_votes =
      std::any_of(spec.schemes.begin(), spec.schemes.end(), [](const SchemeVariant& s) { return s.ten_vote; });

  const std::size_t n_cells = spec.set_sizes.size() * spec.samples_per_cell;
  std::vector<std::vector<ConvergenceRow>> cell_rows(n_cells);

  for_each_index(n_cells, spec.threads, [&](std::size_t cell) {
    const std::size_t n = spec.set_sizes[cell / spec.samples_per_cell];
    const std::size_t sample = cell % spec.samples_per_cell;
    const std::uint64_t seed = cell_seed(spec.seed, n, sample);
    auto& rows = cell_rows[cell];

    std::optional<MaterialDataSet> data;
    std::string data_error;
    try {
      data = sample_dataset(spec.setup.data_spec(n, spec.noise, seed));
      if (need_votes) {
        VotingConfig vc = spec.voting;
        if (spec.sigma_rule) vc.sigma = *spec.sigma_rule * 25.0 / static_cast<double>(n);
        if (!vc.manifold_dim) vc.manifold_dim = spec.setup.manifold_dim();
        vc.threads = 1;
        data = vote_dataset(*data, vc);
      }
    } catch (const std::exception& e) {
      data_error = e.what();
    }
    const DataSets ds = data ? share_dataset(*data, problem.size()) : DataSets{};

    for (const auto& variant : spec.schemes) {
      ConvergenceRow row{variant.name(), n, sample, kNaN, 0, 0.0, "ok"};
      const auto start = std::chrono::steady_clock::now();
      if (!data) {
        row.status = "error: " + data_error;
      } else {
        try {
          SolverConfig cfg = spec.solver;
          cfg.scheme = variant.scheme;
          cfg.ten_vote = variant.ten_vote;
          cfg.rng_seed = cell_seed(seed, 1);
          const SolveResult r = solve(problem, ds, cfg);
          row.distance = global_distance(r.z, reference, problem.metrics);
          row.iterations = r.iterations;
          if (!r.converged) row.status = "not-converged";
        } catch (const std::exception& e) {
          row.status = "error: " + std::string(e.what());
        }
      }
      row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(std::move(row));
    }
  });

  ConvergenceReport report;
  for (const auto& variant : spec.schemes) {
    const auto name = variant.name();
    std::vector<double> sizes, medians;
    const std::size_t first_summary = report.summary.size();
    for (std::size_t si = 0; si < spec.set_sizes.size(); ++si) {
      std::vector<double> d;
      for (std::size_t s = 0; s < spec.samples_per_cell; ++s)
        for (const auto& row : cell_rows[si * spec.samples_per_cell + s])
          if (row.scheme == name) {
            report.rows.push_back(row);
            if (std::isfinite(row.distance)) d.push_back(row.distance);
          }
      const double med = median(d);
      report.summary.push_back({name, spec.set_sizes[si], d.size(), med, 0.0});
      sizes.push_back(static_cast<double>(spec.set_sizes[si]));
      medians.push_back(med);
    }
    const double slope = loglog_slope(sizes, medians);
    for (std::size_t i = first_summary; i < report.summary.size(); ++i) report.summary[i].slope = slope;
  }
  return report;
}

std::string convergence_csv(const ConvergenceReport& report, bool include_wall_time) {
  std::ostringstream out;
  out << "scheme,n,sample,distance,iterations" << (include_wall_time ? ",wall_time" : "") << ",status\n";
  for (const auto& r : report.rows) {
    out << r.scheme << ',' << r.n << ',' << r.sample << ',' << text::format_double(r.distance) << ','
        << r.iterations;
    if (include_wall_time) out << ',' << text::format_double(r.wall_time);
    out << ',' << csv_safe(r.status) << '\n';
  }
  return out.str();
}

std::string convergence_summary_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out << "scheme,n,samples,median_distance,slope\n";
  for (const auto& s : report.summary)
    out << s.scheme << ',' << s.n << ',' << s.samples << ',' << text::format_double(s.median_distance) << ','
        << text::format_double(s.slope) << '\n';
  return out.str();
}

std::string convergence_table(const ConvergenceReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(20) << "scheme" << std::right << std::setw(8) << "n" << std::setw(9) << "samples"
      << std::setw(16) << "median d" << std::setw(10) << "slope" << '\n';
  out << std::scientific << std::setprecision(4);
  for (const auto& s : report.summary)
    out << std::left << std::setw(20) << s.scheme << std::right << std::setw(8) << s.n << std::setw(9)
        << s.samples << std::setw(16) << s.median_distance << std::setw(10) << std::fixed << std::setprecision(3)
        << s.slope << std::scientific << std::setprecision(4) << '\n';
  return out.str();
}

VotingReport run_voting_study(const VotingStudySpec& spec) {
  check_sizes(spec.set_sizes, spec.samples_per_cell);
  if (spec.sigmas.empty() || spec.noise_levels.empty()) throw InvalidArgument("study needs sigma and noise values");
  for (double s : spec.sigmas)
    if (!(s > 0.0)) throw InvalidArgument("voting sigma must be positive");

  const ConstitutiveLaw law = truss_reference_law(spec.law);
  const auto metric = MetricTensor::scalar(spec.law.youngs_modulus);
  const std::size_t per_size = spec.noise_levels.size() * spec.samples_per_cell;
  const std::size_t n_cells = spec.set_sizes.size() * per_size;
  std::vector<std::vector<VotingRow>> cell_rows(n_cells);

  for_each_index(n_cells, spec.threads, [&](std::size_t cell) {
    const std::size_t n = spec.set_sizes[cell / per_size];
    const std::size_t noise_index = (cell % per_size) / spec.samples_per_cell;
    const double noise = spec.noise_levels[noise_index];
    const std::size_t sample = cell % spec.samples_per_cell;
    auto& rows = cell_rows[cell];
    try {
      DataGenSpec d{law, metric};
      d.count = n;
      d.strain_bound = spec.strain_bound;
      d.noise_stddev_fraction = noise;
      d.rng_seed = cell_seed(spec.seed, n, sample);
      const auto data = sample_dataset(d);
      const auto refs = reference_tangents(data, law, spec.strain_bound, spec.reference_samples);
      for (double sigma : spec.sigmas) {
        VotingRow row{n, sigma, noise, sample, kNaN, "ok"};
        try {
          VotingConfig vc = spec.voting;
          vc.sigma = sigma;
          if (!vc.manifold_dim) vc.manifold_dim = 1;
          vc.threads = 1;
          row.delta_theta_deg = angular_error(vote_dataset(data, vc), refs);
        } catch (const std::exception& e) {
          row.status = "error: " + std::string(e.what());
        }
        rows.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      for (double sigma : spec.sigmas)
        rows.push_back({n, sigma, noise, sample, kNaN, "error: " + std::string(e.what())});
    }
  });

  VotingReport report;
  for (std::size_t si = 0; si < spec.set_sizes.size(); ++si)
    for (std::size_t k = 0; k < spec.sigmas.size(); ++k)
      for (std::size_t ni = 0; ni < spec.noise_levels.size(); ++ni) {
        std::vector<double> values;
        for (std::size_t s = 0; s < spec.samples_per_cell; ++s) {
          const auto& row = cell_rows[si * per_size + ni * spec.samples_per_cell + s][k];
          report.rows.push_back(row);
          values.push_back(row.delta_theta_deg);
        }
        report.summary.push_back({spec.set_sizes[si], spec.sigmas[k], spec.noise_levels[ni], median(values)});
      }
  return report;
}

std::string voting_csv(const VotingReport& report) {
  std::ostringstream out;
  out << "n,sigma,noise,sample,delta_theta_deg,status\n";
  for (const auto& r : report.rows)
    out << r.n << ',' << text::format_double(r.sigma) << ',' << text::format_double(r.noise) << ',' << r.sample
        << ',' << text::format_double(r.delta_theta_deg) << ',' << csv_safe(r.status) << '\n';
  return out.str();
}

std::string voting_summary_csv(const VotingReport& report) {
  std::ostringstream out;
  out << "n,sigma,noise,median_delta_theta_deg\n";
  for (const auto& r : report.summary)
    out << r.n << ',' << text::format_double(r.sigma) << ',' << text::format_double(r.noise) << ','
        << text::format_double(r.median_delta_theta_deg) << '\n';
  return out.str();
}

std::vector<CoverageRow> run_coverage_report(const Problem& problem, const std::vector<LocalState>& z,
                                             const DataSets& ds) {
  if (z.empty()) throw InvalidArgument("coverage report needs a solved state");
  if (z.size() != problem.size() || ds.size() != problem.size())
    throw DimensionError("state, data sets and problem disagree on the number of material points");
  std::vector<CoverageRow> rows;
  rows.reserve(z.size());
  for (std::size_t e = 0; e < z.size(); ++e) {
    if (!ds[e]) throw InvalidArgument("missing data set");
    rows.push_back({e, problem.elements[e].position, nearest_neighbor(*ds[e], z[e]).second});
  }
  return rows;
}

std::string coverage_csv(const std::vector<CoverageRow>& rows) {
  std::ostringstream out;
  out << "point,x,y,z,distance\n";
  for (const auto& r : rows) {
    out << r.point;
    for (Eigen::Index i = 0; i < 3; ++i) out << ',' << text::format_double(i < r.position.size() ? r.position(i) : 0.0);
    out << ',' << text::format_double(r.distance) << '\n';
  }
  return out.str();
}

}  // namespace ddcm
