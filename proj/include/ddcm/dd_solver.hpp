#pragma once

#include "ddcm/fem_core.hpp"
#include "ddcm/material_data.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ddcm {

enum class Scheme { MinDist, MaxEnt };

struct SolverConfig {
  Scheme scheme = Scheme::MinDist;
  /// Project onto the voted tangent spaces instead of the raw data points.
  bool ten_vote = false;
  int max_iterations = 1000;
  /// Initial Pareto weight; defaults to 1 / (mean squared nearest-neighbor
  /// distance) of the data.
  std::optional<double> beta0;
  double lambda_anneal = 0.5;
  /// Max-ent stops once beta exceeds this value and the nearest-point
  /// assignment is stable; defaults to 1e4 * beta0.
  std::optional<double> beta_end;
  double distance_tolerance = 0.0;
  /// Max-ent stops early (not converged) once the assignment is stable and
  /// both beta and z change by less than this relative amount per iteration.
  double stall_tolerance = 1e-10;
  /// min-dist/ten-vote only: run classic min-dist from the random start until
  /// the assignment is stable before the tangent iterations begin.
  bool warm_start = true;
  std::uint64_t rng_seed = 0;
  /// Upper bound on the tangent excursion |T^t lambda^t| (learning space).
  std::optional<double> tangent_cap;
};

/// One data set per material point; material points of the same material
/// share the same object.
using DataSets = std::vector<std::shared_ptr<const MaterialDataSet>>;
DataSets share_dataset(MaterialDataSet ds, std::size_t count);

struct ConstraintProjection {
  GlobalState z;
  Vector u;
  Vector eta;
};

/// Closest-point projection onto compatible, equilibrated states. The system
/// matrix is factorized once at construction. Holds a reference to `problem`.
class ConstraintProjector {
 public:
  explicit ConstraintProjector(const Problem& problem);
  ConstraintProjection project(const GlobalState& y) const;

 private:
  const Problem& problem_;
  ConstrainedSolver solver_;
  Vector prescribed_;
};

ConstraintProjection project_constraint(const GlobalState& y, const Problem& problem);

/// Nearest data point per material point. Writes the chosen indices to
/// `assignment` when given.
GlobalState project_data(const GlobalState& z, const DataSets& ds,
                         std::vector<std::size_t>* assignment = nullptr);

/// Closest point to z on the affine tangent space of data point y.
LocalState project_tangent(const LocalState& z, const LocalState& y, const TangentFrame& frame,
                           const MetricTensor& c, std::optional<double> tangent_cap = {});

/// p_i = exp(-beta/2 d^2(z, y_i)) / S over every point of the data set.
Vector maxent_weights(const LocalState& z, const MaterialDataSet& ds, double beta);

/// Same weights restricted to points whose unnormalized weight relative to
/// the largest one exceeds exp(-40).
struct SparseWeights {
  std::vector<std::size_t> index;
  std::vector<double> p;
};
SparseWeights maxent_weights_truncated(const LocalState& z, const MaterialDataSet& ds, double beta);

/// One step of the annealing schedule for the Pareto weight.
double anneal_beta(const std::vector<SparseWeights>& weights, const GlobalState& z_next, const DataSets& ds,
                   double beta_prev, double lambda, double beta_end);

double default_beta0(const DataSets& ds);

struct SolveResult {
  GlobalState z;                 // compatible and equilibrated
  GlobalState y;                 // assigned data states (max-ent: weighted targets)
  std::optional<GlobalState> x;  // tangent-space states (ten-vote)
  Vector u;
  Vector eta;
  std::vector<std::size_t> assignment;  // nearest data point per element
  int iterations = 0;
  std::vector<double> distance_history;
  std::vector<double> beta_history;
  bool converged = false;
  /// assignment-stable | tolerance | no-improvement | beta-end | stalled |
  /// max-iterations. Only the first four count as converged.
  std::string stop_reason;
  /// d(z, P_D z): distance from the final state to the raw data.
  double data_distance = 0.0;
};

SolveResult solve(const Problem& problem, const DataSets& ds, const SolverConfig& cfg);

}  // namespace ddcm
