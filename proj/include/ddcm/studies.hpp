#pragma once

#include "ddcm/benchmarks.hpp"
#include "ddcm/dd_solver.hpp"
#include "ddcm/material_data.hpp"
#include "ddcm/tensor_voting.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ddcm {

enum class Benchmark { Truss, Plate };

struct SchemeVariant {
  Scheme scheme = Scheme::MinDist;
  bool ten_vote = false;

  /// "min-dist", "min-dist/ten-vote", "max-ent" or "max-ent/ten-vote".
  std::string name() const;
  static SchemeVariant parse(const std::string& name);
  bool operator==(const SchemeVariant&) const = default;
};

/// Law, metric and data sampling used for a benchmark.
struct BenchmarkSetup {
  Benchmark benchmark = Benchmark::Truss;
  TrussSpec truss;
  PlateSpec plate;
  TrussLawParams truss_law;
  PlateLawParams plate_law;
  /// Uniform half-width (truss) or standard deviation (plate) of data strains.
  std::optional<double> strain_scale;

  Problem problem() const;
  ConstitutiveLaw law() const;
  MetricTensor metric() const;
  DataGenSpec data_spec(std::size_t count, double noise, std::uint64_t seed) const;
  /// Tangent-space dimension of the law's graph.
  int manifold_dim() const;
};

/// Deterministic 64-bit seed for a study cell.
std::uint64_t cell_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
double median(std::vector<double> values);

struct ConvergenceStudySpec {
  BenchmarkSetup setup;
  std::vector<SchemeVariant> schemes{{Scheme::MinDist, false}, {Scheme::MinDist, true}};
  std::vector<std::size_t> set_sizes{100, 400, 1600, 6400};
  double noise = 0.0;
  std::size_t samples_per_cell = 20;
  /// Solver settings shared by every run; scheme, ten_vote and rng_seed are
  /// overwritten per run.
  SolverConfig solver;
  /// Voting settings; when `sigma_rule` is set the vote sigma is
  /// sigma_rule * 25 / n, i.e. (1/4)^h for n = 25 * 4^h with sigma_rule = 1.
  VotingConfig voting;
  std::optional<double> sigma_rule = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct ConvergenceRow {
  std::string scheme;
  std::size_t n = 0;
  std::size_t sample = 0;
  double distance = 0.0;  // d(z, z_ref)
  int iterations = 0;
  double wall_time = 0.0;  // seconds
  std::string status;      // ok | not-converged | error: ...
};

struct ConvergenceSummaryRow {
  std::string scheme;
  std::size_t n = 0;
  std::size_t samples = 0;  // successful runs
  double median_distance = 0.0;
  double slope = 0.0;  // per scheme, repeated on each of its rows
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSummaryRow> summary;
};

ConvergenceReport run_convergence_study(const ConvergenceStudySpec& spec);
std::string convergence_csv(const ConvergenceReport& report, bool include_wall_time = true);
std::string convergence_summary_csv(const ConvergenceReport& report);
std::string convergence_table(const ConvergenceReport& report);

struct VotingStudySpec {
  TrussLawParams law;
  double strain_bound = 0.025;
  std::vector<std::size_t> set_sizes{100, 400, 1600};
  std::vector<double> sigmas{0.0625, 0.25, 1.0};
  std::vector<double> noise_levels{0.0};
  std::size_t samples_per_cell = 20;
  VotingConfig voting;  // sigma overwritten per cell
  std::size_t reference_samples = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct VotingRow {
  std::size_t n = 0;
  double sigma = 0.0;
  double noise = 0.0;
  std::size_t sample = 0;
  double delta_theta_deg = 0.0;
  std::string status;
};

struct VotingSummaryRow {
  std::size_t n = 0;
  double sigma = 0.0;
  double noise = 0.0;
  double median_delta_theta_deg = 0.0;
};

struct VotingReport {
  std::vector<VotingRow> rows;
  std::vector<VotingSummaryRow> summary;
};

VotingReport run_voting_study(const VotingStudySpec& spec);
std::string voting_csv(const VotingReport& report);
std::string voting_summary_csv(const VotingReport& report);

struct CoverageRow {
  std::size_t point = 0;
  Vector position;
  double distance = 0.0;  // d_e(z, y) to the nearest data point
};

/// Remaining local distance of every material point of a solved state.
std::vector<CoverageRow> run_coverage_report(const Problem& problem, const std::vector<LocalState>& z,
                                             const DataSets& ds);
std::string coverage_csv(const std::vector<CoverageRow>& rows);

}  // namespace ddcm
