#include "ddcm/fem_core.hpp"

#include "ddcm/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace ddcm {

std::vector<double> Problem::weights() const {
  std::vector<double> w;
  w.reserve(elements.size());
  for (const auto& e : elements) w.push_back(e.weight);
  return w;
}

void Problem::validate() const {
  if (f.size() != n_dofs) throw DimensionError("load vector length differs from n_dofs");
  if (metrics.size() != elements.size()) throw DimensionError("need one metric per element");
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    if (static_cast<std::size_t>(el.b.cols()) != el.dofs.size())
      throw DimensionError("element " + std::to_string(e) + ": B columns differ from dof count");
    if (el.b.rows() != metrics[e].dim())
      throw DimensionError("element " + std::to_string(e) + ": B rows differ from metric size");
    if (!(el.weight > 0.0)) throw InvalidArgument("element " + std::to_string(e) + ": weight must be positive");
    for (auto d : el.dofs)
      if (d < 0 || d >= n_dofs) throw InvalidArgument("element " + std::to_string(e) + ": dof out of range");
  }
  for (const auto& bc : dirichlet)
    if (bc.dof < 0 || bc.dof >= n_dofs) throw InvalidArgument("Dirichlet dof out of range");
}

BarOperator build_B_bar(const Vector& x1, const Vector& x2, double area) {
  if (x1.size() != x2.size()) throw DimensionError("bar end coordinates differ in dimension");
  if (!(area > 0.0)) throw InvalidArgument("bar area must be positive");
  const Vector d = x2 - x1;
  const double length = d.norm();
  if (!(length > 0.0)) throw InvalidArgument("degenerate bar of zero length");
  const Vector n = d / length;
  const Eigen::Index dim = x1.size();
  Matrix b(1, 2 * dim);
  b.block(0, 0, 1, dim) = -n.transpose() / length;
  b.block(0, dim, 1, dim) = n.transpose() / length;
  return {b, area * length};
}

BarOperator build_B_quad4(const Eigen::Matrix<double, 4, 2>& coords, double xi, double eta,
                          double gauss_weight, double thickness) {
  // shape function derivatives w.r.t. (xi, eta), nodes at (-1,-1) (1,-1) (1,1) (-1,1)
  Eigen::Matrix<double, 2, 4> dn;
  dn << -(1 - eta), (1 - eta), (1 + eta), -(1 + eta),
        -(1 - xi), -(1 + xi), (1 + xi), (1 - xi);
  dn *= 0.25;
  const Eigen::Matrix2d jac = dn * coords;  // [dx/dxi dy/dxi; dx/deta dy/deta]
  const double det = jac.determinant();
  if (!(det > 0.0)) throw InvalidArgument("quadrilateral has non-positive Jacobian determinant");
  const Eigen::Matrix<double, 2, 4> dxy = jac.inverse() * dn;

  Matrix b = Matrix::Zero(3, 8);
  for (int a = 0; a < 4; ++a) {
    b(0, 2 * a) = dxy(0, a);
    b(1, 2 * a + 1) = dxy(1, a);
    b(2, 2 * a) = dxy(1, a);
    b(2, 2 * a + 1) = dxy(0, a);
  }
  return {b, det * gauss_weight * thickness};
}

SparseMatrix assemble_lhs(const Problem& problem) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t e = 0; e < problem.elements.size(); ++e) {
    const auto& el = problem.elements[e];
    const Matrix ke = el.weight * el.b.transpose() * problem.metrics[e].c() * el.b;
    for (std::size_t r = 0; r < el.dofs.size(); ++r)
      for (std::size_t c = 0; c < el.dofs.size(); ++c)
        triplets.emplace_back(el.dofs[r], el.dofs[c], ke(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
  }
  SparseMatrix k(problem.n_dofs, problem.n_dofs);
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

namespace {

template <class ElementVector>
Vector assemble_vector(const Problem& problem, ElementVector&& local) {
  Vector out = Vector::Zero(problem.n_dofs);
  for (std::size_t e = 0; e < problem.elements.size(); ++e) {
    const auto& el = problem.elements[e];
    const Vector fe = local(e);
    for (std::size_t r = 0; r < el.dofs.size(); ++r) out(el.dofs[r]) += fe(static_cast<Eigen::Index>(r));
  }
  return out;
}

void check_per_element(const Problem& problem, const std::vector<Vector>& values) {
  if (values.size() != problem.elements.size())
    throw DimensionError("need one vector per element");
  for (std::size_t e = 0; e < values.size(); ++e)
    if (values[e].size() != problem.elements[e].b.rows())
      throw DimensionError("element " + std::to_string(e) + ": vector length differs from B rows");
}

SparseMatrix assemble_tangent(const Problem& problem, const std::vector<Matrix>& d) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t e = 0; e < problem.elements.size(); ++e) {
    const auto& el = problem.elements[e];
    const Matrix ke = el.weight * el.b.transpose() * d[e] * el.b;
    for (std::size_t r = 0; r < el.dofs.size(); ++r)
      for (std::size_t c = 0; c < el.dofs.size(); ++c)
        triplets.emplace_back(el.dofs[r], el.dofs[c], ke(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
  }
  SparseMatrix k(problem.n_dofs, problem.n_dofs);
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

std::vector<Eigen::Index> constrained_dofs(const std::vector<DirichletCondition>& dirichlet) {
  std::vector<Eigen::Index> dofs;
  for (const auto& bc : dirichlet) dofs.push_back(bc.dof);
  return dofs;
}

Vector prescribed_vector(Eigen::Index n, const std::vector<DirichletCondition>& dirichlet) {
  Vector v = Vector::Zero(n);
  for (const auto& bc : dirichlet) v(bc.dof) = bc.value;
  return v;
}

}  // namespace

Vector assemble_rhs_strain(const Problem& problem, const std::vector<Vector>& eps_star) {
  check_per_element(problem, eps_star);
  return assemble_vector(problem, [&](std::size_t e) -> Vector {
    const auto& el = problem.elements[e];
    return el.weight * el.b.transpose() * (problem.metrics[e].c() * eps_star[e]);
  });
}

Vector assemble_rhs_stress(const Problem& problem, const std::vector<Vector>& sigma_star) {
  check_per_element(problem, sigma_star);
  return assemble_vector(problem, [&](std::size_t e) -> Vector {
    const auto& el = problem.elements[e];
    return el.weight * el.b.transpose() * sigma_star[e];
  });
}

ConstrainedSolver::ConstrainedSolver(const SparseMatrix& lhs, const std::vector<Eigen::Index>& constrained)
    : n_(lhs.rows()) {
  if (lhs.rows() != lhs.cols()) throw DimensionError("system matrix must be square");
  local_.assign(static_cast<std::size_t>(n_), 0);
  for (auto d : constrained) {
    if (d < 0 || d >= n_) throw InvalidArgument("constrained dof out of range");
    local_[static_cast<std::size_t>(d)] = -1;
  }
  for (Eigen::Index i = 0; i < n_; ++i)
    if (local_[static_cast<std::size_t>(i)] == 0) {
      local_[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(free_.size());
      free_.push_back(i);
    } else {
      local_[static_cast<std::size_t>(i)] = -1;
    }

  const auto n_free = static_cast<Eigen::Index>(free_.size());
  std::vector<Eigen::Triplet<double>> kff, kfa;
  for (Eigen::Index col = 0; col < lhs.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(lhs, col); it; ++it) {
      const Eigen::Index r = local_[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      kfa.emplace_back(r, it.col(), it.value());
      const Eigen::Index c = local_[static_cast<std::size_t>(it.col())];
      if (c >= 0) kff.emplace_back(r, c, it.value());
    }
  SparseMatrix reduced(n_free, n_free);
  reduced.setFromTriplets(kff.begin(), kff.end());
  coupling_.resize(n_free, n_);
  coupling_.setFromTriplets(kfa.begin(), kfa.end());

  factor_ = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
  if (n_free == 0) return;
  factor_->compute(reduced);
  int zero_modes = 0;
  bool failed = factor_->info() != Eigen::Success;
  if (!failed) {
    const Vector& d = factor_->vectorD();
    const double scale = d.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (!(d(i) > 1e-12 * scale)) ++zero_modes;
    failed = zero_modes > 0;
  }
  if (failed) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig{Matrix(reduced), Eigen::EigenvaluesOnly};
    const Vector ev = eig.eigenvalues().cwiseAbs();
    const double top = ev.maxCoeff();
    zero_modes = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (!(ev(i) > 1e-10 * top)) ++zero_modes;
    zero_modes = std::max(zero_modes, 1);
    throw SingularSystemError("system is singular after applying boundary conditions: " +
                                  std::to_string(zero_modes) + " zero-energy mode(s)",
                              zero_modes);
  }
}

Vector ConstrainedSolver::solve(const Vector& rhs, const Vector& prescribed) const {
  if (rhs.size() != n_ || prescribed.size() != n_) throw DimensionError("right-hand side has wrong length");
  Vector fixed = Vector::Zero(n_);
  for (Eigen::Index i = 0; i < n_; ++i)
    if (local_[static_cast<std::size_t>(i)] < 0) fixed(i) = prescribed(i);

  Vector out = fixed;
  if (free_.empty()) return out;
  Vector b(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) b(static_cast<Eigen::Index>(k)) = rhs(free_[k]);
  b -= coupling_ * fixed;
  const Vector x = factor_->solve(b);
  for (std::size_t k = 0; k < free_.size(); ++k) out(free_[k]) = x(static_cast<Eigen::Index>(k));
  return out;
}

Vector ConstrainedSolver::solve_homogeneous(const Vector& rhs) const {
  return solve(rhs, Vector::Zero(n_));
}

Vector linear_solve(const SparseMatrix& lhs, const Vector& rhs, const std::vector<DirichletCondition>& dirichlet) {
  const ConstrainedSolver solver(lhs, constrained_dofs(dirichlet));
  return solver.solve(rhs, prescribed_vector(lhs.rows(), dirichlet));
}

std::vector<Vector> element_strains(const Problem& problem, const Vector& u) {
  if (u.size() != problem.n_dofs) throw DimensionError("displacement vector has wrong length");
  std::vector<Vector> eps;
  eps.reserve(problem.elements.size());
  for (const auto& el : problem.elements) {
    Vector ue(static_cast<Eigen::Index>(el.dofs.size()));
    for (std::size_t k = 0; k < el.dofs.size(); ++k) ue(static_cast<Eigen::Index>(k)) = u(el.dofs[k]);
    eps.push_back(el.b * ue);
  }
  return eps;
}

double equilibrium_residual(const Problem& problem, const std::vector<Vector>& stresses) {
  Vector r = problem.f - assemble_rhs_stress(problem, stresses);
  for (const auto& bc : problem.dirichlet) r(bc.dof) = 0.0;
  return r.norm();
}

NewtonResult newton_reference_solve(const Problem& problem, const ConstitutiveLaw& law,
                                    const NewtonOptions& options) {
  problem.validate();
  for (const auto& el : problem.elements)
    if (el.b.rows() != law.dim) throw DimensionError("law dimension differs from element strain size");

  const auto constrained = constrained_dofs(problem.dirichlet);
  Vector u = prescribed_vector(problem.n_dofs, problem.dirichlet);

  auto residual = [&](const Vector& uu, std::vector<Vector>& eps, std::vector<Vector>& sig) {
    eps = element_strains(problem, uu);
    sig.clear();
    for (const auto& e : eps) sig.push_back(law.stress(e));
    return equilibrium_residual(problem, sig);
  };

  Vector f_free = problem.f;
  for (auto d : constrained) f_free(d) = 0.0;
  const double ref = f_free.norm() > 0.0 ? f_free.norm() : 1.0;

  NewtonResult result;
  std::vector<Vector> eps, sig;
  double r_norm = residual(u, eps, sig);
  result.residual_history.push_back(r_norm);

  for (int it = 0;; ++it) {
    if (r_norm <= options.relative_tolerance * ref) {
      result.iterations = it;
      result.u = u;
      std::vector<LocalState> states;
      for (std::size_t e = 0; e < eps.size(); ++e) states.emplace_back(eps[e], sig[e]);
      result.z = GlobalState(std::move(states), problem.weights());
      return result;
    }
    if (it == options.max_iterations) break;
    std::vector<Matrix> d;
    d.reserve(eps.size());
    for (const auto& e : eps) d.push_back(law.stiffness(e));
    const ConstrainedSolver solver(assemble_tangent(problem, d), constrained);
    const Vector r = problem.f - assemble_rhs_stress(problem, sig);
    const Vector du = solver.solve_homogeneous(r);

    // backtracking on the residual norm; inadmissible trial strains count as failure
    double alpha = 1.0;
    bool accepted = false;
    std::vector<Vector> eps_try, sig_try;
    for (int ls = 0; ls < 30 && !accepted; ++ls, alpha *= 0.5) {
      const Vector u_try = u + alpha * du;
      double r_try = HUGE_VAL;
      try {
        r_try = residual(u_try, eps_try, sig_try);
      } catch (const InvalidArgument&) {
        continue;
      }
      if (r_try < r_norm || ls == 29) {
        u = u_try;
        eps = std::move(eps_try);
        sig = std::move(sig_try);
        r_norm = r_try;
        accepted = true;
      }
    }
    if (!accepted) break;
    result.residual_history.push_back(r_norm);
  }

  std::string history;
  for (double r : result.residual_history) history += " " + std::to_string(r);
  throw ConvergenceError("Newton solver did not converge in " + std::to_string(options.max_iterations) +
                         " iterations; residual history:" + history);
}

}  // namespace ddcm
