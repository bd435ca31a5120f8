#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ddcm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One material point's strain-stress pair. Strain in Voigt form with
/// engineering shear, stress in MPa.
struct LocalState {
  Vector strain;
  Vector stress;

  LocalState() = default;
  LocalState(Vector eps, Vector sig);

  static LocalState zero(Eigen::Index dim);
  Eigen::Index dim() const { return strain.size(); }

  LocalState operator-(const LocalState& other) const;
  LocalState operator+(const LocalState& other) const;
  LocalState operator*(double t) const;
};

/// Symmetric positive-definite weighting matrix of the phase-space norm,
/// with its square root and inverse square root cached at construction.
class MetricTensor {
 public:
  MetricTensor() = default;
  explicit MetricTensor(const Matrix& c);

  static MetricTensor scalar(double c0, Eigen::Index dim = 1);
  /// Isotropic plane-strain elasticity matrix in Voigt notation
  /// (engineering shear).
  static MetricTensor plane_strain(double youngs_modulus, double poisson);

  Eigen::Index dim() const { return c_.rows(); }
  const Matrix& c() const { return c_; }
  const Matrix& c_inv() const { return c_inv_; }
  const Matrix& c_sqrt() const { return c_sqrt_; }
  const Matrix& c_inv_sqrt() const { return c_inv_sqrt_; }

  bool operator==(const MetricTensor& other) const { return c_ == other.c_; }

 private:
  Matrix c_;
  Matrix c_inv_;
  Matrix c_sqrt_;
  Matrix c_inv_sqrt_;
};

/// A point of the global phase space: one local state per material point,
/// each carrying its integration weight (volume).
struct GlobalState {
  std::vector<LocalState> states;
  std::vector<double> weights;

  GlobalState() = default;
  GlobalState(std::vector<LocalState> s, std::vector<double> w);

  std::size_t size() const { return states.size(); }
};

/// (1/2 C eps.eps + 1/2 C^-1 sig.sig)^(1/2)
double local_norm(const LocalState& z, const MetricTensor& c);
double local_distance(const LocalState& z, const LocalState& y, const MetricTensor& c);
double local_distance_squared(const LocalState& z, const LocalState& y,
                              const MetricTensor& c);

/// Weighted root-sum-square of local distances. Weights are taken from `z`.
double global_distance(const GlobalState& z, const GlobalState& y,
                       const std::vector<MetricTensor>& metrics);

/// Maps z to [C^(1/2) eps ; C^(-1/2) sig]. Squared Euclidean distances in
/// this space are twice the squared local distances.
Vector to_learning_space(const LocalState& z, const MetricTensor& c);
LocalState from_learning_space(const Vector& p, const MetricTensor& c);

}  // namespace ddcm
