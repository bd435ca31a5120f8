#include "ddcm/phase_space.hpp"

#include "ddcm/errors.hpp"

#include <cmath>
#include <string>

namespace ddcm {

namespace {

void check_state(const LocalState& z, const MetricTensor& c) {
  if (z.strain.size() != z.stress.size())
    throw DimensionError("strain and stress lengths differ");
  if (z.strain.size() != c.dim())
    throw DimensionError("state dimension " + std::to_string(z.strain.size()) +
                         " does not match metric dimension " + std::to_string(c.dim()));
}

}  // namespace

LocalState::LocalState(Vector eps, Vector sig) : strain(std::move(eps)), stress(std::move(sig)) {
  if (strain.size() != stress.size())
    throw DimensionError("strain and stress lengths differ");
}

LocalState LocalState::zero(Eigen::Index dim) {
  return {Vector::Zero(dim), Vector::Zero(dim)};
}

LocalState LocalState::operator-(const LocalState& other) const {
  return {strain - other.strain, stress - other.stress};
}

LocalState LocalState::operator+(const LocalState& other) const {
  return {strain + other.strain, stress + other.stress};
}

LocalState LocalState::operator*(double t) const { return {strain * t, stress * t}; }

MetricTensor::MetricTensor(const Matrix& c) {
  if (c.rows() != c.cols() || c.rows() == 0)
    throw DimensionError("metric must be a non-empty square matrix");
  const double scale = c.cwiseAbs().maxCoeff();
  if (!c.allFinite() || scale == 0.0)
    throw InvalidArgument("metric entries must be finite and not all zero");
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("metric is not symmetric");

  c_ = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c_);
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 0.0) throw InvalidArgument("metric is not positive definite");

  const Matrix& q = eig.eigenvectors();
  c_sqrt_ = q * lambda.cwiseSqrt().asDiagonal() * q.transpose();
  c_inv_sqrt_ = q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  c_inv_ = q * lambda.cwiseInverse().asDiagonal() * q.transpose();
}

MetricTensor MetricTensor::scalar(double c0, Eigen::Index dim) {
  return MetricTensor(Matrix::Identity(dim, dim) * c0);
}

MetricTensor MetricTensor::plane_strain(double youngs_modulus, double poisson) {
  const double lambda =
      youngs_modulus * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  const double mu = youngs_modulus / (2.0 * (1.0 + poisson));
  Matrix c(3, 3);
  c << lambda + 2.0 * mu, lambda, 0.0,
       lambda, lambda + 2.0 * mu, 0.0,
       0.0, 0.0, mu;
  return MetricTensor(c);
}

GlobalState::GlobalState(std::vector<LocalState> s, std::vector<double> w)
    : states(std::move(s)), weights(std::move(w)) {
  if (states.size() != weights.size())
    throw DimensionError("number of states and weights differ");
  for (double wi : weights)
    if (!(wi > 0.0)) throw InvalidArgument("global state weights must be positive");
}

double local_distance_squared(const LocalState& z, const LocalState& y, const MetricTensor& c) {
  check_state(z, c);
  check_state(y, c);
  const Vector de = z.strain - y.strain;
  const Vector ds = z.stress - y.stress;
  return 0.5 * de.dot(c.c() * de) + 0.5 * ds.dot(c.c_inv() * ds);
}

double local_norm(const LocalState& z, const MetricTensor& c) {
  check_state(z, c);
  const double sq = 0.5 * z.strain.dot(c.c() * z.strain) + 0.5 * z.stress.dot(c.c_inv() * z.stress);
  return std::sqrt(std::max(sq, 0.0));
}

double local_distance(const LocalState& z, const LocalState& y, const MetricTensor& c) {
  return std::sqrt(std::max(local_distance_squared(z, y, c), 0.0));
}

double global_distance(const GlobalState& z, const GlobalState& y,
                       const std::vector<MetricTensor>& metrics) {
  if (z.size() != y.size() || z.size() != metrics.size())
    throw DimensionError("global states and metrics must have the same number of points");
  if (z.weights.size() != z.size()) throw DimensionError("missing weights");
  double sum = 0.0;
  for (std::size_t e = 0; e < z.size(); ++e)
    sum += z.weights[e] * local_distance_squared(z.states[e], y.states[e], metrics[e]);
  return std::sqrt(sum);
}

Vector to_learning_space(const LocalState& z, const MetricTensor& c) {
  check_state(z, c);
  const Eigen::Index m = c.dim();
  Vector p(2 * m);
  p.head(m) = c.c_sqrt() * z.strain;
  p.tail(m) = c.c_inv_sqrt() * z.stress;
  return p;
}

LocalState from_learning_space(const Vector& p, const MetricTensor& c) {
  if (p.size() % 2 != 0) throw DimensionError("learning-space vector has odd length");
  const Eigen::Index m = p.size() / 2;
  if (m != c.dim()) throw DimensionError("learning-space vector does not match metric");
  return {c.c_inv_sqrt() * p.head(m), c.c_sqrt() * p.tail(m)};
}

}  // namespace ddcm
