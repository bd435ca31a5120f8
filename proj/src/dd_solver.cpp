#include "ddcm/dd_solver.hpp"

#include "ddcm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

namespace ddcm {

namespace {

// exp(-40) relative weight cut-off, expressed in learning-space units where
// |P - Q|^2 = 2 d^2
constexpr double kWeightCutoff = 40.0;

std::vector<Eigen::Index> constrained(const Problem& p) {
  std::vector<Eigen::Index> d;
  d.reserve(p.dirichlet.size());
  for (const auto& bc : p.dirichlet) d.push_back(bc.dof);
  return d;
}

void check_inputs(const Problem& problem, const DataSets& ds) {
  problem.validate();
  if (ds.size() != problem.size())
    throw DimensionError("need one data set per material point (" + std::to_string(problem.size()) +
                         "), got " + std::to_string(ds.size()));
  for (std::size_t e = 0; e < ds.size(); ++e) {
    if (!ds[e]) throw InvalidArgument("missing data set for material point " + std::to_string(e));
    if (!(ds[e]->metric() == problem.metrics[e]))
      throw InvalidArgument("data set metric differs from the problem metric at material point " +
                            std::to_string(e));
  }
}

GlobalState gather(const DataSets& ds, const std::vector<std::size_t>& idx, const std::vector<double>& w) {
  std::vector<LocalState> states;
  states.reserve(idx.size());
  for (std::size_t e = 0; e < idx.size(); ++e) states.push_back(ds[e]->point(idx[e]));
  return GlobalState(std::move(states), w);
}

std::vector<std::size_t> nearest_assignment(const GlobalState& z, const DataSets& ds) {
  std::vector<std::size_t> idx(z.size());
  for (std::size_t e = 0; e < z.size(); ++e)
    idx[e] = ds[e]->tree().nearest(to_learning_space(z.states[e], ds[e]->metric())).index;
  return idx;
}

GlobalState tangent_states(const GlobalState& z, const DataSets& ds, const std::vector<std::size_t>& idx,
                           const std::optional<double>& cap) {
  std::vector<LocalState> states;
  states.reserve(z.size());
  for (std::size_t e = 0; e < z.size(); ++e) {
    const auto& data = *ds[e];
    states.push_back(project_tangent(z.states[e], data.point(idx[e]), data.frame(idx[e]), data.metric(), cap));
  }
  return GlobalState(std::move(states), z.weights);
}

// T^t lambda^t for lambda = T^T (z - y); the basis is orthonormal, so this
// solves z - y = T lambda.
Vector tangent_step(const Vector& z_ls, const Eigen::Ref<const Vector>& y_ls, const TangentFrame& frame,
                    const std::optional<double>& cap) {
  const auto tangents = frame.tangents();
  Vector step = tangents * (tangents.transpose() * (z_ls - y_ls));
  if (cap) {
    const double len = step.norm();
    if (len > *cap && len > 0.0) step *= *cap / len;
  }
  return step;
}

}  // namespace

DataSets share_dataset(MaterialDataSet ds, std::size_t count) {
  auto shared = std::make_shared<const MaterialDataSet>(std::move(ds));
  return DataSets(count, shared);
}

ConstraintProjector::ConstraintProjector(const Problem& problem)
    : problem_(problem), solver_(assemble_lhs(problem), constrained(problem)) {
  problem.validate();
  prescribed_ = Vector::Zero(problem.n_dofs);
  for (const auto& bc : problem.dirichlet) prescribed_(bc.dof) = bc.value;
}

ConstraintProjection ConstraintProjector::project(const GlobalState& y) const {
  if (y.size() != problem_.size()) throw DimensionError("state has wrong number of material points");
  std::vector<Vector> eps_star, sig_star;
  eps_star.reserve(y.size());
  sig_star.reserve(y.size());
  for (const auto& s : y.states) {
    eps_star.push_back(s.strain);
    sig_star.push_back(s.stress);
  }
  ConstraintProjection out;
  out.u = solver_.solve(assemble_rhs_strain(problem_, eps_star), prescribed_);
  out.eta = solver_.solve_homogeneous(problem_.f - assemble_rhs_stress(problem_, sig_star));

  const auto eps = element_strains(problem_, out.u);
  const auto b_eta = element_strains(problem_, out.eta);
  std::vector<LocalState> states;
  states.reserve(y.size());
  for (std::size_t e = 0; e < y.size(); ++e)
    states.emplace_back(eps[e], sig_star[e] + problem_.metrics[e].c() * b_eta[e]);
  out.z = GlobalState(std::move(states), problem_.weights());
  return out;
}

ConstraintProjection project_constraint(const GlobalState& y, const Problem& problem) {
  return ConstraintProjector(problem).project(y);
}

GlobalState project_data(const GlobalState& z, const DataSets& ds, std::vector<std::size_t>* assignment) {
  if (z.size() != ds.size()) throw DimensionError("need one data set per material point");
  for (const auto& d : ds)
    if (!d) throw InvalidArgument("missing data set");
  auto idx = nearest_assignment(z, ds);
  GlobalState y = gather(ds, idx, z.weights);
  if (assignment) *assignment = std::move(idx);
  return y;
}

LocalState project_tangent(const LocalState& z, const LocalState& y, const TangentFrame& frame,
                           const MetricTensor& c, std::optional<double> tangent_cap) {
  const Vector y_ls = to_learning_space(y, c);
  if (frame.basis.rows() != y_ls.size()) throw DimensionError("frame size differs from learning-space size");
  return from_learning_space(y_ls + tangent_step(to_learning_space(z, c), y_ls, frame, tangent_cap), c);
}

Vector maxent_weights(const LocalState& z, const MaterialDataSet& ds, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  const auto n = static_cast<Eigen::Index>(ds.size());
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d2(i) = local_distance_squared(z, ds.point(static_cast<std::size_t>(i)), ds.metric());
  const double d2_min = d2.minCoeff();
  Vector p = (-0.5 * beta * (d2.array() - d2_min)).exp().matrix();
  return p / p.sum();
}

SparseWeights maxent_weights_truncated(const LocalState& z, const MaterialDataSet& ds, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  const Vector q = to_learning_space(z, ds.metric());
  const double l2_min = ds.tree().nearest(q).distance_squared;
  // exp(-beta/2 (d^2 - d^2_min)) = exp(-beta/4 (L^2 - L^2_min))
  const double radius2 = l2_min + 4.0 * kWeightCutoff / beta;
  const auto hits = ds.tree().within_radius(q, radius2);

  SparseWeights out;
  out.index.reserve(hits.size());
  out.p.reserve(hits.size());
  double d2_min = HUGE_VAL;
  for (const auto& h : hits) {
    const double d2 = local_distance_squared(z, ds.point(h.index), ds.metric());
    out.index.push_back(h.index);
    out.p.push_back(d2);
    d2_min = std::min(d2_min, d2);
  }
  double sum = 0.0;
  for (auto& p : out.p) {
    p = std::exp(-0.5 * beta * (p - d2_min));
    sum += p;
  }
  for (auto& p : out.p) p /= sum;
  return out;
}

double anneal_beta(const std::vector<SparseWeights>& weights, const GlobalState& z_next, const DataSets& ds,
                   double beta_prev, double lambda, double beta_end) {
  if (weights.size() != z_next.size() || ds.size() != z_next.size())
    throw DimensionError("weights, states and data sets must have one entry per material point");
  if (lambda < 0.0 || lambda > 1.0) throw InvalidArgument("lambda must be in [0, 1]");
  const double floor = beta_prev * (1.0 + 1e-12);

  double num = 0.0;
  double den = 0.0;
  for (std::size_t e = 0; e < z_next.size(); ++e) {
    double spread = 0.0;
    const auto& we = weights[e];
    for (std::size_t k = 0; k < we.index.size(); ++k)
      spread += we.p[k] * local_distance_squared(ds[e]->point(we.index[k]), z_next.states[e], ds[e]->metric());
    const double w = z_next.weights.empty() ? 1.0 : z_next.weights[e];
    if (spread == 0.0) return std::max(beta_end, floor);
    num += w / spread;
    den += w;
  }
  const double beta_tilde = num / den;
  if (!std::isfinite(beta_tilde)) return std::max(beta_end, floor);
  return std::max(lambda * beta_tilde + (1.0 - lambda) * beta_prev, floor);
}

double default_beta0(const DataSets& ds) {
  std::map<const MaterialDataSet*, double> cache;
  double sum = 0.0;
  for (const auto& d : ds) {
    auto it = cache.find(d.get());
    if (it == cache.end()) it = cache.emplace(d.get(), mean_squared_nn_distance(*d)).first;
    sum += it->second;
  }
  const double mean = sum / static_cast<double>(ds.size());
  if (!(mean > 0.0)) throw InvalidArgument("data set spacing is zero; cannot derive beta0");
  return 1.0 / mean;
}

namespace {

SolveResult finish(SolveResult r, const Problem& problem, const DataSets& ds) {
  r.assignment = nearest_assignment(r.z, ds);
  r.data_distance = global_distance(r.z, gather(ds, r.assignment, r.z.weights), problem.metrics);
  return r;
}

SolveResult solve_min_dist(const Problem& problem, const DataSets& ds, const SolverConfig& cfg,
                           const ConstraintProjector& pc, std::vector<std::size_t> assign) {
  SolveResult r;
  r.stop_reason = "max-iterations";
  const auto w = problem.weights();
  ConstraintProjection proj = pc.project(gather(ds, assign, w));
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    r.iterations = it;
    auto next = nearest_assignment(proj.z, ds);
    GlobalState y = gather(ds, next, w);
    const double d = global_distance(proj.z, y, problem.metrics);
    r.distance_history.push_back(d);
    const bool stable = next == assign;
    r.z = proj.z;
    r.y = y;
    r.u = proj.u;
    r.eta = proj.eta;
    if (stable || d <= cfg.distance_tolerance) {
      r.converged = true;
      r.stop_reason = stable ? "assignment-stable" : "tolerance";
      break;
    }
    assign = std::move(next);
    proj = pc.project(y);
  }
  return r;
}

SolveResult solve_min_dist_ten_vote(const Problem& problem, const DataSets& ds, const SolverConfig& cfg,
                                    const ConstraintProjector& pc, const std::vector<std::size_t>& start) {
  SolveResult best;
  const auto w = problem.weights();
  ConstraintProjection proj = pc.project(gather(ds, start, w));
  double best_d = std::numeric_limits<double>::infinity();
  double prev_d = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
  std::string reason = "max-iterations";
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    iterations = it;
    const auto assign = nearest_assignment(proj.z, ds);
    GlobalState x = tangent_states(proj.z, ds, assign, cfg.tangent_cap);
    const double d = global_distance(proj.z, x, problem.metrics);
    history.push_back(d);
    if (d < best_d) {
      best_d = d;
      best.z = proj.z;
      best.y = gather(ds, assign, w);
      best.x = x;
      best.u = proj.u;
      best.eta = proj.eta;
    }
    if (d <= cfg.distance_tolerance || d >= prev_d) {
      converged = true;
      reason = d <= cfg.distance_tolerance ? "tolerance" : "no-improvement";
      break;
    }
    prev_d = d;
    proj = pc.project(x);
  }
  best.iterations = iterations;
  best.distance_history = std::move(history);
  best.converged = converged;
  best.stop_reason = reason;
  return best;
}

SolveResult solve_max_ent(const Problem& problem, const DataSets& ds, const SolverConfig& cfg,
                          const ConstraintProjector& pc, const std::vector<std::size_t>& start) {
  const double beta0 = cfg.beta0 ? *cfg.beta0 : default_beta0(ds);
  const double beta_end = cfg.beta_end ? *cfg.beta_end : 1e4 * beta0;
  if (!(beta0 > 0.0)) throw InvalidArgument("beta0 must be positive");
  if (!(beta_end > beta0)) throw InvalidArgument("beta_end must exceed beta0");
  if (cfg.lambda_anneal < 0.0 || cfg.lambda_anneal > 1.0) throw InvalidArgument("lambda must be in [0, 1]");

  const auto w = problem.weights();
  const std::size_t m = problem.size();
  ConstraintProjection proj = pc.project(gather(ds, start, w));
  double beta = beta0;
  std::vector<std::size_t> prev_assign;
  std::vector<SparseWeights> weights(m);

  SolveResult r;
  r.stop_reason = "max-iterations";
  SolveResult best;
  double best_d = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    r.iterations = it;
    std::vector<LocalState> targets;
    targets.reserve(m);
    for (std::size_t e = 0; e < m; ++e) {
      const auto& data = *ds[e];
      const LocalState& ze = proj.z.states[e];
      weights[e] = maxent_weights_truncated(ze, data, beta);
      const Vector z_ls = to_learning_space(ze, data.metric());
      Vector acc = Vector::Zero(z_ls.size());
      for (std::size_t k = 0; k < weights[e].index.size(); ++k) {
        const std::size_t i = weights[e].index[k];
        const auto y_ls = data.learning_point(i);
        acc += weights[e].p[k] * y_ls;
        if (cfg.ten_vote) acc += weights[e].p[k] * tangent_step(z_ls, y_ls, data.frame(i), cfg.tangent_cap);
      }
      targets.push_back(from_learning_space(acc, data.metric()));
    }
    GlobalState y(std::move(targets), w);
    ConstraintProjection next = pc.project(y);
    const double beta_next = anneal_beta(weights, next.z, ds, beta, cfg.lambda_anneal, beta_end);
    r.beta_history.push_back(beta);

    auto assign = nearest_assignment(next.z, ds);
    double d;
    if (cfg.ten_vote) {
      GlobalState x = tangent_states(next.z, ds, assign, cfg.tangent_cap);
      d = global_distance(next.z, x, problem.metrics);
      r.x = std::move(x);
    } else {
      d = global_distance(next.z, gather(ds, assign, w), problem.metrics);
    }
    r.distance_history.push_back(d);

    const double step = global_distance(next.z, proj.z, problem.metrics);
    double scale = 0.0;
    for (std::size_t e = 0; e < m; ++e) scale += w[e] * std::pow(local_norm(next.z.states[e], problem.metrics[e]), 2);
    scale = std::sqrt(scale);
    const bool stable = assign == prev_assign;
    proj = std::move(next);
    r.y = std::move(y);
    if (d < best_d) {
      best_d = d;
      best.z = proj.z;
      best.y = r.y;
      best.x = r.x;
      best.u = proj.u;
      best.eta = proj.eta;
    }
    if (beta_next > beta_end && stable) {
      r.converged = true;
      r.stop_reason = "beta-end";
      break;
    }
    if (stable && beta_next - beta <= cfg.stall_tolerance * beta && step <= cfg.stall_tolerance * scale) {
      r.stop_reason = "stalled";
      break;
    }
    prev_assign = std::move(assign);
    beta = beta_next;
  }
  if (r.converged) {
    r.z = proj.z;
    r.u = proj.u;
    r.eta = proj.eta;
  } else {
    r.z = std::move(best.z);
    r.y = std::move(best.y);
    r.x = std::move(best.x);
    r.u = std::move(best.u);
    r.eta = std::move(best.eta);
  }
  return r;
}

}  // namespace

SolveResult solve(const Problem& problem, const DataSets& ds, const SolverConfig& cfg) {
  check_inputs(problem, ds);
  if (cfg.max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
  if (cfg.ten_vote)
    for (const auto& d : ds)
      if (!d->has_frames()) throw InvalidArgument("ten-vote schemes need voted data sets");

  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<std::size_t> start(problem.size());
  for (std::size_t e = 0; e < start.size(); ++e) {
    std::uniform_int_distribution<std::size_t> pick(0, ds[e]->size() - 1);
    start[e] = pick(rng);
  }

  const ConstraintProjector pc(problem);
  SolveResult r;
  if (cfg.scheme == Scheme::MinDist && cfg.ten_vote && cfg.warm_start) {
    const SolveResult warm = solve_min_dist(problem, ds, cfg, pc, start);
    const int remaining = std::max(1, cfg.max_iterations - warm.iterations);
    SolverConfig rest = cfg;
    rest.max_iterations = remaining;
    r = solve_min_dist_ten_vote(problem, ds, rest, pc, nearest_assignment(warm.z, ds));
    r.distance_history.insert(r.distance_history.begin(), warm.distance_history.begin(),
                              warm.distance_history.end());
    r.iterations += warm.iterations;
  } else if (cfg.scheme == Scheme::MinDist) {
    r = cfg.ten_vote ? solve_min_dist_ten_vote(problem, ds, cfg, pc, start)
                     : solve_min_dist(problem, ds, cfg, pc, start);
  } else
    r = solve_max_ent(problem, ds, cfg, pc, start);
  return finish(std::move(r), problem, ds);
}

}  // namespace ddcm
