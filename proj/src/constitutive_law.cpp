#include "ddcm/constitutive_law.hpp"

#include "ddcm/errors.hpp"

#include <string>

namespace ddcm {

namespace {

void check_strain(const ConstitutiveLaw& law, const Eigen::VectorXd& strain) {
  if (strain.size() != law.dim)
    throw DimensionError("law '" + law.name + "' expects strain of length " +
                         std::to_string(law.dim));
  if (law.admissible_strain && strain.cwiseAbs().maxCoeff() > *law.admissible_strain)
    throw InvalidArgument("strain outside the admissible range of law '" + law.name + "'");
}

}  // namespace

Eigen::VectorXd ConstitutiveLaw::stress(const Eigen::VectorXd& strain) const {
  check_strain(*this, strain);
  return eval(strain);
}

Eigen::MatrixXd ConstitutiveLaw::stiffness(const Eigen::VectorXd& strain) const {
  check_strain(*this, strain);
  return tangent(strain);
}

ConstitutiveLaw linear_law(const Eigen::MatrixXd& c, std::string name) {
  ConstitutiveLaw law;
  law.name = std::move(name);
  law.dim = c.rows();
  law.eval = [c](const Eigen::VectorXd& eps) -> Eigen::VectorXd { return c * eps; };
  law.tangent = [c](const Eigen::VectorXd&) -> Eigen::MatrixXd { return c; };
  return law;
}

}  // namespace ddcm
