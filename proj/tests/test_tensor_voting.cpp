#include "ddcm/benchmarks.hpp"
#include "ddcm/errors.hpp"
#include "ddcm/material_data.hpp"
#include "ddcm/tensor_voting.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace ddcm;
using doctest::Approx;

namespace {

Eigen::VectorXd random_vec(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

// Points of a 1D metric data set placed on a learning-space curve.
MaterialDataSet from_learning_points(const std::vector<Eigen::Vector2d>& pts, double c0 = 1.0) {
  const auto c = MetricTensor::scalar(c0);
  std::vector<LocalState> states;
  for (const auto& p : pts) states.push_back(from_learning_space(p, c));
  return MaterialDataSet(std::move(states), c);
}

double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::acos(std::min(1.0, std::abs(a.dot(b)) / (a.norm() * b.norm())));
}

}  // namespace

TEST_CASE("ball vote hand case") {
  Eigen::VectorXd r(2), v(2);
  r << 1, 0;
  v << 0, 0;
  const auto t = ball_vote(r, v, 1.0);
  CHECK(t(0, 0) == Approx(0.0));
  CHECK(t(0, 1) == Approx(0.0));
  CHECK(t(1, 1) == Approx(std::exp(-1.0)));
}

TEST_CASE("ball vote spectrum and null direction") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> sig(0.2, 3.0);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index n = 2 + k % 5;
    const auto a = random_vec(rng, n);
    const auto b = random_vec(rng, n);
    const double sigma = sig(rng);
    const auto t = ball_vote(a, b, sigma);
    const double w = std::exp(-(a - b).squaredNorm() / (sigma * sigma));
    CHECK((t * (a - b)).norm() <= 1e-12 * (a - b).norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-10 * w);
    for (Eigen::Index i = 1; i < n; ++i) CHECK(es.eigenvalues()(i) == Approx(w).epsilon(1e-10));
  }
}

TEST_CASE("ball vote errors") {
  const Eigen::VectorXd a = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(ball_vote(a, a, 1.0), DegenerateVoteError);
  CHECK_THROWS_AS(ball_vote(a, Eigen::VectorXd::Zero(2), 0.0), InvalidArgument);
  CHECK_THROWS_AS(ball_vote(a, Eigen::VectorXd::Zero(3), 1.0), DimensionError);
}

TEST_CASE("accumulated votes") {
  SUBCASE("one neighbor equals the single vote") {
    const auto ds = from_learning_points({{0, 0}, {1, 0.5}, {3, 3}});
    VotingConfig cfg;
    cfg.k_neighbors = 1;
    cfg.sigma = 2.0;
    const auto r = accumulate_votes(ds, 0, cfg);
    CHECK((r - ball_vote(ds.learning_point(0), ds.learning_point(1), 2.0)).norm() <= 1e-15);
  }
  SUBCASE("collinear neighbors share the null direction") {
    std::vector<Eigen::Vector2d> pts;
    const Eigen::Vector2d u = Eigen::Vector2d(3, 1).normalized();
    for (int i = 0; i < 9; ++i) pts.push_back(0.1 * i * u + Eigen::Vector2d(1, 2));
    const auto ds = from_learning_points(pts);
    VotingConfig cfg;
    cfg.k_neighbors = 6;
    cfg.sigma = 0.5;
    CHECK((accumulate_votes(ds, 4, cfg) * u).norm() <= 1e-10);
  }
  SUBCASE("symmetric positive semidefinite on random sets") {
    std::mt19937_64 rng(2);
    std::vector<LocalState> states;
    for (int i = 0; i < 60; ++i) states.push_back(oracle::random_state(rng, 3));
    const MaterialDataSet ds(states, MetricTensor::plane_strain(1e5, 0.3));
    VotingConfig cfg;
    cfg.k_neighbors = 10;
    cfg.sigma = 3.0;
    for (std::size_t i = 0; i < ds.size(); i += 5) {
      const auto r = accumulate_votes(ds, i, cfg);
      CHECK((r - r.transpose()).norm() <= 1e-14 * r.norm());
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r).eigenvalues().minCoeff() >= -1e-10);
    }
  }
  SUBCASE("duplicates are skipped and counted") {
    const auto ds = from_learning_points({{0, 0}, {0, 0}, {1, 1}, {2, 2.5}});
    VotingConfig cfg;
    cfg.k_neighbors = 2;
    cfg.sigma = 1.0;
    VotingStats stats;
    const auto r = accumulate_votes(ds, 0, cfg, &stats);
    CHECK(stats.skipped_duplicates == 1);
    CHECK((r - ball_vote(ds.learning_point(0), ds.learning_point(2), 1.0)).norm() <= 1e-15);
  }
  SUBCASE("too few points") {
    const auto ds = from_learning_points({{0, 0}, {1, 1}});
    VotingConfig cfg;
    cfg.k_neighbors = 2;
    CHECK_THROWS_AS(accumulate_votes(ds, 0, cfg), InvalidArgument);
  }
}

TEST_CASE("tensor analysis") {
  SUBCASE("diagonal tensor") {
    Eigen::MatrixXd r = Eigen::Vector2d(2, 1).asDiagonal();
    VotingConfig cfg;
    cfg.manifold_dim = 1;
    const auto f = analyze_tensor(r, cfg);
    CHECK(std::abs(f.normals()(0, 0)) == Approx(1.0));
    CHECK(std::abs(f.tangents()(1, 0)) == Approx(1.0));
    CHECK(f.eigenvalues(0) == Approx(2.0));
    CHECK_FALSE(f.degenerate);
  }
  SUBCASE("orthonormal basis with descending eigenvalues") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
      Eigen::MatrixXd a(6, 6);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = std::normal_distribution<double>()(rng);
      const Eigen::MatrixXd r = a * a.transpose();
      VotingConfig cfg;
      const auto f = analyze_tensor(r, cfg);
      CHECK((f.basis.transpose() * f.basis - Eigen::MatrixXd::Identity(6, 6)).norm() <= 1e-10);
      for (Eigen::Index i = 1; i < 6; ++i) CHECK(f.eigenvalues(i) <= f.eigenvalues(i - 1));
      CHECK(f.k >= 1);
      CHECK(f.k <= 5);
      CHECK((r * f.basis - f.basis * f.eigenvalues.asDiagonal()).norm() <= 1e-9 * r.norm());
    }
  }
  SUBCASE("eigenvalue gap estimate") {
    Eigen::MatrixXd r = Eigen::VectorXd::Map(std::vector<double>{5, 4.8, 0.1, 0.05}.data(), 4).asDiagonal();
    const auto f = analyze_tensor(r, VotingConfig{});
    CHECK(f.k == 2);
  }
  SUBCASE("degenerate tensor is flagged and deterministic") {
    const auto f = analyze_tensor(Eigen::MatrixXd::Identity(3, 3), VotingConfig{});
    CHECK(f.degenerate);
    CHECK(f.basis == Eigen::MatrixXd::Identity(3, 3));
  }
  SUBCASE("errors") {
    Eigen::MatrixXd r(2, 2);
    r << 1, 2, 0, 1;
    CHECK_THROWS_AS(analyze_tensor(r, VotingConfig{}), InvalidArgument);
    VotingConfig cfg;
    cfg.manifold_dim = 2;
    CHECK_THROWS_AS(analyze_tensor(Eigen::Matrix2d::Identity(), cfg), InvalidArgument);
  }
}

TEST_CASE("line data: tangents follow the exact line") {
  const double e = 1e5;
  SUBCASE("two points") {
    std::vector<LocalState> pts;
    for (double eps : {0.001, 0.002}) pts.push_back({Vector::Constant(1, eps), Vector::Constant(1, e * eps)});
    const MaterialDataSet ds(pts, MetricTensor::scalar(e));
    VotingConfig cfg;
    cfg.k_neighbors = 1;
    cfg.manifold_dim = 1;
    const auto voted = vote_dataset(ds, cfg);
    const Eigen::Vector2d dir(1, 1);  // learning-space image of sigma = E eps with C = E
    CHECK(angle(voted.frame(0).tangents().col(0), dir) < 1e-6);
  }
  SUBCASE("200 points") {
    DataGenSpec s{linear_law(Matrix::Constant(1, 1, e)), MetricTensor::scalar(e)};
    s.count = 200;
    VotingConfig cfg;
    cfg.k_neighbors = 6;
    cfg.sigma = 0.1;
    cfg.manifold_dim = 1;
    const auto voted = vote_dataset(sample_dataset(s), cfg);
    for (std::size_t i = 0; i < voted.size(); ++i) CHECK(angle(voted.frame(i).tangents().col(0), Eigen::Vector2d(1, 1)) < 1e-4);
  }
}

TEST_CASE("circle data: tangents perpendicular to the radius") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> th(0.0, 2.0 * std::numbers::pi);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 500; ++i) {
    const double t = th(rng);
    pts.emplace_back(3.0 * std::cos(t), 3.0 * std::sin(t));
  }
  const auto ds = from_learning_points(pts, 1e5);
  VotingConfig cfg;
  cfg.k_neighbors = 6;
  cfg.sigma = 0.1;
  cfg.manifold_dim = 1;
  const auto voted = vote_dataset(ds, cfg);
  double sum = 0;
  for (std::size_t i = 0; i < voted.size(); ++i)
    sum += angle(voted.frame(i).tangents().col(0), Eigen::Vector2d(-pts[i].y(), pts[i].x()));
  CHECK(sum / 500.0 * 180.0 / std::numbers::pi < 0.5);
}

TEST_CASE("voting is deterministic, thread independent and translation invariant") {
  DataGenSpec s{truss_reference_law(), MetricTensor::scalar(1e5)};
  s.count = 300;
  s.noise_stddev_fraction = 0.01;
  VotingConfig cfg;
  cfg.sigma = 0.5;
  cfg.k_neighbors = 20;
  const auto ds = sample_dataset(s);
  const auto a = vote_dataset(ds, cfg);
  const auto b = vote_dataset(ds, cfg);
  cfg.threads = 4;
  const auto c = vote_dataset(ds, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(a.frame(i) == b.frame(i));
    CHECK(a.frame(i) == c.frame(i));
  }
  CHECK_FALSE(ds.has_frames());

  // translate every learning point by the same offset
  const Eigen::Vector2d shift(0.7, -1.3);
  std::vector<LocalState> moved;
  for (std::size_t i = 0; i < ds.size(); ++i)
    moved.push_back(from_learning_space(ds.learning_point(i) + shift, ds.metric()));
  cfg.threads = 1;
  const auto t = vote_dataset(MaterialDataSet(moved, ds.metric()), cfg);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& fa = a.frame(i);
    const auto& ft = t.frame(i);
    CHECK(fa.k == ft.k);
    CHECK((fa.eigenvalues - ft.eigenvalues).norm() <= 1e-10 * fa.eigenvalues.norm());
    // eigenvectors are defined up to sign
    for (Eigen::Index col = 0; col < 2; ++col)
      CHECK(std::abs(std::abs(fa.basis.col(col).dot(ft.basis.col(col))) - 1.0) <= 1e-10);
  }
}

TEST_CASE("angular error") {
  std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 1}, {2, 2}};
  const auto ds = from_learning_points(pts);
  VotingConfig cfg;
  cfg.k_neighbors = 2;
  cfg.manifold_dim = 1;
  const auto voted = vote_dataset(ds, cfg);
  const std::vector<Eigen::VectorXd> same(3, Eigen::Vector2d(1, 1));
  const std::vector<Eigen::VectorXd> flipped(3, Eigen::Vector2d(-2, -2));
  const std::vector<Eigen::VectorXd> ortho(3, Eigen::Vector2d(1, -1));
  CHECK(angular_error(voted, same) < 1e-5);
  CHECK(angular_error(voted, flipped) == angular_error(voted, same));
  CHECK(angular_error(voted, ortho) == Approx(90.0));
  CHECK_THROWS_AS(angular_error(ds, same), InvalidArgument);
  CHECK_THROWS_AS(angular_error(voted, std::vector<Eigen::VectorXd>(3, Eigen::Vector2d::Zero())), InvalidArgument);
  CHECK_THROWS_AS(angular_error(voted, std::vector<Eigen::VectorXd>(2, Eigen::Vector2d(1, 1))), DimensionError);
}

TEST_CASE("reference tangents of a linear law") {
  DataGenSpec s{linear_law(Matrix::Constant(1, 1, 4e4)), MetricTensor::scalar(1e5)};
  s.count = 20;
  s.noise_stddev_fraction = 0.02;
  const auto ds = sample_dataset(s);
  const auto refs = reference_tangents(ds, s.law, 0.03, 1000);
  // learning-space direction of sigma = 4e4 eps under C = 1e5
  const Eigen::Vector2d dir(std::sqrt(1e5), 4e4 / std::sqrt(1e5));
  for (const auto& r : refs) CHECK(angle(r, dir) < 1e-7);
}
