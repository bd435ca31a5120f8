#include "ddcm/benchmarks.hpp"
#include "ddcm/dd_solver.hpp"
#include "ddcm/errors.hpp"
#include "ddcm/tensor_voting.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ddcm;
using doctest::Approx;

namespace {

constexpr double kE = 1e5;

// One bar of unit length and area along a single free dof.
Problem single_bar(double force) {
  Problem p;
  p.n_dofs = 1;
  p.elements.push_back({Matrix::Constant(1, 1, 1.0), 1.0, {0}, Vector::Zero(1)});
  p.f = Vector::Constant(1, force);
  p.metrics = {MetricTensor::scalar(kE)};
  return p;
}

Problem small_truss() { return build_truss(TrussSpec{.levels = 3, .bays = 1}); }

MaterialDataSet linear_data(std::size_t count) {
  DataGenSpec s{linear_law(Matrix::Constant(1, 1, kE)), MetricTensor::scalar(kE)};
  s.count = count;
  s.sampling = StrainSampling::Grid;
  return sample_dataset(s);
}

MaterialDataSet truss_data(std::size_t count, std::uint64_t seed = 1) {
  DataGenSpec s{truss_reference_law(), MetricTensor::scalar(kE)};
  s.count = count;
  s.rng_seed = seed;
  return sample_dataset(s);
}

GlobalState random_global(const Problem& p, std::mt19937_64& rng) {
  std::vector<LocalState> s;
  for (std::size_t e = 0; e < p.size(); ++e) s.push_back(oracle::random_state(rng, p.metrics[e].dim()));
  return GlobalState(std::move(s), p.weights());
}

double state_gap(const GlobalState& a, const GlobalState& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) {
    num += (a.states[e].strain - b.states[e].strain).squaredNorm() * 1e10 +
           (a.states[e].stress - b.states[e].stress).squaredNorm();
    den += a.states[e].strain.squaredNorm() * 1e10 + a.states[e].stress.squaredNorm();
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

std::vector<Vector> stresses(const GlobalState& z) {
  std::vector<Vector> s;
  for (const auto& st : z.states) s.push_back(st.stress);
  return s;
}

// Invariants every solver result must satisfy.
void check_result_invariants(const Problem& p, const SolveResult& r) {
  REQUIRE(r.z.size() == p.size());
  const auto eps = element_strains(p, r.u);
  for (std::size_t e = 0; e < p.size(); ++e)
    CHECK((r.z.states[e].strain - eps[e]).norm() <= 1e-10 * std::max(eps[e].norm(), 1e-12));
  CHECK(equilibrium_residual(p, stresses(r.z)) <= 1e-8 * p.f.norm());
  CHECK(r.iterations == static_cast<int>(r.distance_history.size()));
  CHECK(r.assignment.size() == p.size());
}

}  // namespace

TEST_CASE("constraint projection: single bar by hand") {
  const double force = 250.0;
  const auto p = single_bar(force);
  const GlobalState y({LocalState::zero(1)}, {1.0});
  const auto r = project_constraint(y, p);
  CHECK(r.u(0) == Approx(0.0));
  CHECK(r.eta(0) == Approx(force / kE));
  CHECK(r.z.states[0].strain(0) == Approx(0.0));
  CHECK(r.z.states[0].stress(0) == Approx(force));
}

TEST_CASE("constraint projection properties") {
  const auto p = small_truss();
  std::mt19937_64 rng(11);
  const ConstraintProjector pc(p);
  for (int k = 0; k < 10; ++k) {
    const auto y = random_global(p, rng);
    const auto z = pc.project(y);
    const auto zz = pc.project(z.z);
    CHECK(state_gap(z.z, zz.z) <= 1e-9);
    CHECK(equilibrium_residual(p, stresses(z.z)) <= 1e-8 * p.f.norm());
    // z is the closest admissible state: other admissible states are farther from y
    const auto other = pc.project(random_global(p, rng));
    CHECK(global_distance(z.z, y, p.metrics) <= global_distance(other.z, y, p.metrics) + 1e-9);
  }
  SUBCASE("states of the constraint set are fixed") {
    const auto ref = newton_reference_solve(p, truss_reference_law());
    CHECK(state_gap(ref.z, pc.project(ref.z).z) <= 1e-9);
  }
  SUBCASE("eta vanishes on supported dofs") {
    const auto z = pc.project(random_global(p, rng));
    for (const auto& bc : p.dirichlet) CHECK(z.eta(bc.dof) == 0.0);
  }
  SUBCASE("mechanism") {
    auto q = p;
    q.dirichlet.clear();
    CHECK_THROWS_AS(ConstraintProjector{q}, SingularSystemError);
  }
}

TEST_CASE("data projection") {
  const auto p = small_truss();
  const auto ds = share_dataset(truss_data(500), p.size());
  std::mt19937_64 rng(12);
  const auto z = random_global(p, rng);
  std::vector<std::size_t> idx;
  const auto y = project_data(z, ds, &idx);
  for (std::size_t e = 0; e < p.size(); ++e) {
    const auto q = to_learning_space(z.states[e], ds[e]->metric());
    const auto best = oracle::scan(ds[e]->learning_points(), q);
    CHECK(idx[e] == best.front().second);
    // minimal over a sample of other data points
    for (std::size_t i = 0; i < ds[e]->size(); i += 37)
      CHECK(local_distance(z.states[e], y.states[e], p.metrics[e]) <=
            local_distance(z.states[e], ds[e]->point(i), p.metrics[e]) + 1e-12);
  }
  SUBCASE("data points are fixed") {
    std::vector<LocalState> s;
    for (std::size_t e = 0; e < p.size(); ++e) s.push_back(ds[e]->point(e * 7));
    const GlobalState on_data(s, p.weights());
    const auto back = project_data(on_data, ds);
    for (std::size_t e = 0; e < p.size(); ++e) CHECK(back.states[e].stress == on_data.states[e].stress);
  }
  CHECK_THROWS_AS(project_data(GlobalState({LocalState::zero(1)}, {1.0}), ds), DimensionError);
}

TEST_CASE("tangent projection") {
  const auto c = MetricTensor::scalar(4.0);
  const LocalState y(Vector::Constant(1, 0.5), Vector::Constant(1, 1.0));
  const Eigen::Vector2d t = Eigen::Vector2d(1, 2).normalized();
  const Eigen::Vector2d n(-t(1), t(0));
  TangentFrame frame;
  frame.basis.resize(2, 2);
  frame.basis << n, t;
  frame.eigenvalues = Eigen::Vector2d(1, 0);
  frame.k = 1;
  const Vector y_ls = to_learning_space(y, c);

  const auto x0 = project_tangent(y, y, frame, c);
  CHECK((to_learning_space(x0, c) - y_ls).norm() <= 1e-12);

  const auto z_in = from_learning_space(y_ls + 0.7 * t, c);
  CHECK((to_learning_space(project_tangent(z_in, y, frame, c), c) - y_ls - 0.7 * t).norm() <= 1e-10);

  const auto z_out = from_learning_space(y_ls + 0.7 * n, c);
  CHECK((to_learning_space(project_tangent(z_out, y, frame, c), c) - y_ls).norm() <= 1e-10);

  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const auto z = oracle::random_state(rng, 1, 1.0, 1.0);
    const auto x = project_tangent(z, y, frame, c);
    const Vector r = to_learning_space(z, c) - to_learning_space(x, c);
    CHECK(std::abs(r.dot(t)) <= 1e-10);
    const auto capped = project_tangent(z, y, frame, c, 0.1);
    CHECK((to_learning_space(capped, c) - y_ls).norm() <= 0.1 + 1e-12);
  }
  TangentFrame wrong = frame;
  wrong.basis = Eigen::Matrix3d::Identity();
  CHECK_THROWS_AS(project_tangent(y, y, wrong, c), DimensionError);
}

TEST_CASE("max-ent weights") {
  const auto c = MetricTensor::scalar(1.0);
  std::vector<LocalState> pts{{Vector::Constant(1, -1), Vector::Zero(1)},
                              {Vector::Constant(1, 1), Vector::Zero(1)},
                              {Vector::Constant(1, 3), Vector::Constant(1, 0.5)}};
  const MaterialDataSet ds(pts, c);
  const LocalState z = LocalState::zero(1);

  SUBCASE("equidistant pair") {
    const MaterialDataSet pair({pts[0], pts[1]}, c);
    const Vector p = maxent_weights(z, pair, 3.0);
    CHECK(p(0) == Approx(0.5));
    CHECK(p(1) == Approx(0.5));
  }
  SUBCASE("hand value") {
    const double beta = 0.8;
    Eigen::Vector3d w;
    for (int i = 0; i < 3; ++i) w(i) = std::exp(-0.5 * beta * oracle::distance_squared(z, pts[i], c.c()));
    w /= w.sum();
    CHECK((maxent_weights(z, ds, beta) - w).norm() <= 1e-14);
  }
  SUBCASE("limits") {
    const LocalState q(Vector::Constant(1, 0.9), Vector::Zero(1));
    CHECK(maxent_weights(q, ds, 1e12 / 0.4)(1) >= 1.0 - 1e-9);
    const Vector flat = maxent_weights(q, ds, 1e-12);
    CHECK((flat.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-6);
    CHECK(maxent_weights(q, ds, 1e300).sum() == Approx(1.0));
  }
  SUBCASE("truncated weights agree with the dense ones") {
    const auto big = truss_data(3000);
    std::mt19937_64 rng(14);
    for (double beta : {1.0, 100.0, 1e4, 1e7}) {
      for (int k = 0; k < 10; ++k) {
        const auto q = oracle::random_state(rng, 1, 0.02, 800.0);
        const Vector dense = maxent_weights(q, big, beta);
        const auto sparse = maxent_weights_truncated(q, big, beta);
        Vector expanded = Vector::Zero(dense.size());
        for (std::size_t i = 0; i < sparse.index.size(); ++i)
          expanded(static_cast<Eigen::Index>(sparse.index[i])) = sparse.p[i];
        CHECK((expanded - dense).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(dense.sum() == Approx(1.0).epsilon(1e-12));
        CHECK(dense.minCoeff() >= 0.0);
      }
    }
  }
  CHECK_THROWS_AS(maxent_weights(z, ds, 0.0), InvalidArgument);
}

TEST_CASE("annealing") {
  const auto c = MetricTensor::scalar(1.0);
  // squared distances 1 and 3 from the origin
  const MaterialDataSet ds({{Vector::Constant(1, std::sqrt(2.0)), Vector::Zero(1)},
                            {Vector::Constant(1, std::sqrt(6.0)), Vector::Zero(1)}},
                           c);
  const DataSets sets = share_dataset(ds, 1);
  const GlobalState z({LocalState::zero(1)}, {1.0});
  const std::vector<SparseWeights> w{{{0, 1}, {0.5, 0.5}}};
  CHECK(anneal_beta(w, z, sets, 0.1, 0.5, 100.0) == Approx(0.3));
  CHECK(anneal_beta(w, z, sets, 0.1, 0.0, 100.0) == 0.1 * (1.0 + 1e-12));
  CHECK(anneal_beta(w, z, sets, 0.1, 1.0, 100.0) == Approx(0.5));
  CHECK(anneal_beta(w, z, sets, 2.0, 1.0, 100.0) == 2.0 * (1.0 + 1e-12));
  // zero spread: exact data
  const GlobalState on({ds.point(0)}, {1.0});
  const std::vector<SparseWeights> one{{{0}, {1.0}}};
  CHECK(anneal_beta(one, on, sets, 0.1, 0.5, 100.0) == 100.0);
  CHECK_THROWS_AS(anneal_beta(w, z, sets, 0.1, 1.5, 100.0), InvalidArgument);
}

TEST_CASE("solver on a singleton data set") {
  const auto p = single_bar(300.0);
  const MaterialDataSet one({{Vector::Constant(1, 300.0 / kE), Vector::Constant(1, 300.0)}}, MetricTensor::scalar(kE));
  for (auto scheme : {Scheme::MinDist, Scheme::MaxEnt}) {
    SolverConfig cfg;
    cfg.scheme = scheme;
    cfg.beta0 = 1.0;
    const auto r = solve(p, share_dataset(one, 1), cfg);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK(r.z.states[0].stress(0) == Approx(300.0));
    CHECK(r.z.states[0].strain(0) == Approx(300.0 / kE));
    CHECK(r.data_distance <= 1e-9);
  }
}

TEST_CASE("min-dist solver") {
  const auto p = small_truss();
  const auto ds = share_dataset(truss_data(400), p.size());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SolverConfig cfg;
    cfg.rng_seed = seed;
    const auto r = solve(p, ds, cfg);
    CHECK(r.converged);
    CHECK(r.stop_reason == "assignment-stable");
    check_result_invariants(p, r);
    for (std::size_t k = 1; k < r.distance_history.size(); ++k)
      CHECK(r.distance_history[k] <= r.distance_history[k - 1] + 1e-12);
    CHECK(r.data_distance == Approx(r.distance_history.back()));
    // deterministic for a fixed seed
    const auto again = solve(p, ds, cfg);
    CHECK(again.distance_history == r.distance_history);
  }
}

TEST_CASE("linear data recovers the linear-elastic solution") {
  const auto p = small_truss();
  const auto lin = linear_law(Matrix::Constant(1, 1, kE));
  const auto ref = newton_reference_solve(p, lin);
  const auto data = linear_data(2000);
  const double spacing = std::sqrt(mean_squared_nn_distance(data));
  double total_weight = 0.0;
  for (double w : p.weights()) total_weight += w;

  SolverConfig cfg;
  const auto md = solve(p, share_dataset(data, p.size()), cfg);
  CHECK(global_distance(md.z, ref.z, p.metrics) <= spacing * std::sqrt(total_weight));

  VotingConfig vc;
  vc.k_neighbors = 8;
  vc.sigma = 0.1;
  vc.manifold_dim = 1;
  cfg.ten_vote = true;
  const auto voted = share_dataset(vote_dataset(data, vc), p.size());
  const auto tv = solve(p, voted, cfg);
  check_result_invariants(p, tv);
  CHECK(state_gap(ref.z, tv.z) <= 1e-6);

  SUBCASE("ten-vote residual is orthogonal to the tangents") {
    REQUIRE(tv.x);
    for (std::size_t e = 0; e < p.size(); ++e) {
      const auto& frame = voted[e]->frame(tv.assignment[e]);
      const Vector r = to_learning_space(tv.z.states[e], p.metrics[e]) - to_learning_space(tv.x->states[e], p.metrics[e]);
      CHECK((frame.tangents().transpose() * r).norm() <= 1e-10);
    }
  }
}

TEST_CASE("max-ent solver") {
  const auto p = small_truss();
  const auto ds = share_dataset(truss_data(400), p.size());
  SolverConfig cfg;
  cfg.scheme = Scheme::MaxEnt;
  cfg.rng_seed = 3;
  const auto r = solve(p, ds, cfg);
  check_result_invariants(p, r);
  REQUIRE(r.beta_history.size() == r.distance_history.size());
  for (std::size_t k = 1; k < r.beta_history.size(); ++k) CHECK(r.beta_history[k] > r.beta_history[k - 1]);
  CHECK(r.beta_history.front() == Approx(default_beta0(ds)));
  if (!r.converged) {
    // the best iterate is returned
    double best = r.distance_history.front();
    for (double d : r.distance_history) best = std::min(best, d);
    CHECK(r.stop_reason != "beta-end");
    CHECK(r.data_distance == Approx(best));
  } else {
    CHECK(r.stop_reason == "beta-end");
  }

  SUBCASE("ten-vote variant keeps the invariants") {
    VotingConfig vc;
    vc.manifold_dim = 1;
    vc.sigma = 0.5;
    const auto voted = share_dataset(vote_dataset(*ds.front(), vc), p.size());
    cfg.ten_vote = true;
    check_result_invariants(p, solve(p, voted, cfg));
  }
}

TEST_CASE("solver input errors") {
  const auto p = small_truss();
  const auto data = truss_data(100);
  SolverConfig cfg;
  SUBCASE("wrong number of data sets") {
    CHECK_THROWS_AS(solve(p, share_dataset(data, p.size() - 1), cfg), DimensionError);
  }
  SUBCASE("metric mismatch") {
    DataGenSpec s{truss_reference_law(), MetricTensor::scalar(2e5)};
    CHECK_THROWS_AS(solve(p, share_dataset(sample_dataset(s), p.size()), cfg), InvalidArgument);
  }
  SUBCASE("ten-vote without frames") {
    cfg.ten_vote = true;
    CHECK_THROWS_AS(solve(p, share_dataset(data, p.size()), cfg), InvalidArgument);
  }
  SUBCASE("annealing parameters") {
    cfg.scheme = Scheme::MaxEnt;
    cfg.beta0 = 10.0;
    cfg.beta_end = 5.0;
    CHECK_THROWS_AS(solve(p, share_dataset(data, p.size()), cfg), InvalidArgument);
    cfg.beta_end.reset();
    cfg.lambda_anneal = 2.0;
    CHECK_THROWS_AS(solve(p, share_dataset(data, p.size()), cfg), InvalidArgument);
  }
  SUBCASE("iteration budget") {
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(solve(p, share_dataset(data, p.size()), cfg), InvalidArgument);
  }
}
