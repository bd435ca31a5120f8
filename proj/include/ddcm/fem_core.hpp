#pragma once

#include "ddcm/constitutive_law.hpp"
#include "ddcm/phase_space.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace ddcm {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Strain-displacement operator of one material point (bar or Gauss point).
struct ElementOperator {
  Matrix b;                          // m_e x n_local
  double weight = 0.0;               // volume (mm^3)
  std::vector<Eigen::Index> dofs;    // n_local global indices
  Vector position;                   // material point coordinates, for reports
};

struct DirichletCondition {
  Eigen::Index dof;
  double value;
};

/// Discretized boundary value problem in the form consumed by the solvers.
struct Problem {
  std::vector<ElementOperator> elements;
  Eigen::Index n_dofs = 0;
  Vector f;
  std::vector<DirichletCondition> dirichlet;
  std::vector<MetricTensor> metrics;  // one per element

  std::size_t size() const { return elements.size(); }
  std::vector<double> weights() const;
  /// Throws on out-of-range dofs, size mismatches and non-positive weights.
  void validate() const;
};

struct BarOperator {
  Matrix b;
  double weight;
};

/// Two-node bar: axial strain from the difference of end displacements
/// projected on the unit axis. `x1`, `x2` have the spatial dimension.
BarOperator build_B_bar(const Vector& x1, const Vector& x2, double area);

/// Bilinear quadrilateral, plane strain, Voigt (e11, e22, 2 e12). Nodes are
/// the rows of `coords` (4 x 2), counter-clockwise. Returns B (3 x 8) and
/// w = det(J) * gauss_weight * thickness.
BarOperator build_B_quad4(const Eigen::Matrix<double, 4, 2>& coords, double xi, double eta,
                          double gauss_weight, double thickness);

/// Assembly of w B^T C B over all elements (no boundary conditions).
SparseMatrix assemble_lhs(const Problem& problem);
Vector assemble_rhs_strain(const Problem& problem, const std::vector<Vector>& eps_star);
/// Internal-force assembly of w B^T sigma; callers subtract it from f.
Vector assemble_rhs_stress(const Problem& problem, const std::vector<Vector>& sigma_star);

/// Cholesky factorization of a symmetric matrix restricted to the free
/// (unconstrained) dofs. Built once, reused for every right-hand side.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const SparseMatrix& lhs, const std::vector<Eigen::Index>& constrained_dofs);

  /// Solves with constrained entries fixed at `prescribed` (full-length
  /// vector; only constrained entries are read).
  Vector solve(const Vector& rhs, const Vector& prescribed) const;
  Vector solve_homogeneous(const Vector& rhs) const;

  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_ = 0;
  std::vector<Eigen::Index> free_;   // free dof -> global
  std::vector<Eigen::Index> local_;  // global -> free index or -1
  SparseMatrix coupling_;            // free rows x all columns
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factor_;
};

/// One-shot solve of lhs u = rhs with Dirichlet values eliminated.
Vector linear_solve(const SparseMatrix& lhs, const Vector& rhs,
                    const std::vector<DirichletCondition>& dirichlet);

struct NewtonResult {
  GlobalState z;
  Vector u;
  int iterations = 0;
  std::vector<double> residual_history;  // free-dof residual norms
};

struct NewtonOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 50;
};

/// Newton-Raphson equilibrium solve with the given law at every element.
NewtonResult newton_reference_solve(const Problem& problem, const ConstitutiveLaw& law,
                                    const NewtonOptions& options = {});

/// Element strains B u.
std::vector<Vector> element_strains(const Problem& problem, const Vector& u);

/// Free-dof norm of f - A{w B^T sigma}.
double equilibrium_residual(const Problem& problem, const std::vector<Vector>& stresses);

}  // namespace ddcm
