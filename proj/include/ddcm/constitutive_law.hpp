#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace ddcm {

/// Stress response and its consistent tangent for one material point.
struct ConstitutiveLaw {
  std::string name;
  Eigen::Index dim = 1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> tangent;
  /// Largest admissible |strain component|; unbounded when empty.
  std::optional<double> admissible_strain;

  Eigen::VectorXd stress(const Eigen::VectorXd& strain) const;
  Eigen::MatrixXd stiffness(const Eigen::VectorXd& strain) const;
};

/// sigma = C eps with constant C.
ConstitutiveLaw linear_law(const Eigen::MatrixXd& c, std::string name = "linear");

}  // namespace ddcm
