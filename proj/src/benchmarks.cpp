#include "ddcm/benchmarks.hpp"

#include "ddcm/errors.hpp"

#include <cmath>
#include <numbers>

namespace ddcm {

ConstitutiveLaw truss_reference_law(const TrussLawParams& params) {
  const double e = params.youngs_modulus;
  const double sy = params.yield_stress;
  ConstitutiveLaw law;
  law.name = "truss_tanh";
  law.dim = 1;
  law.admissible_strain = params.admissible_strain;
  law.eval = [e, sy](const Vector& eps) -> Vector {
    return Vector::Constant(1, sy * std::tanh(e * eps(0) / sy));
  };
  law.tangent = [e, sy](const Vector& eps) -> Matrix {
    const double c = std::cosh(e * eps(0) / sy);
    return Matrix::Constant(1, 1, e / (c * c));
  };
  return law;
}

double plate_g(double x, const PlateLawParams& params) {
  const double v = std::pow(std::abs(x) + params.a, params.p) - std::pow(params.a, params.p);
  return x < 0.0 ? -v : (x > 0.0 ? v : 0.0);
}

Eigen::Matrix3d plate_orthotropic_matrix(const PlateLawParams& params) {
  const double e = params.youngs_modulus;
  const double nu = params.poisson;
  const double c1111 = 4.6875 * e;
  const double g_perp = 0.3 * e;
  const double g_par = 0.2 * e;
  const double lambda_bar = (2.0 * nu * nu + 1.0) / (15.0 - 20.0 * nu * nu) * e;
  const double off = 2.0 * nu * (lambda_bar + g_perp);
  Eigen::Matrix3d d;
  d << c1111, off, 0.0,
       off, lambda_bar + 2.0 * g_perp, 0.0,
       0.0, 0.0, g_par;
  return d;
}

ConstitutiveLaw plate_reference_law(const PlateLawParams& params) {
  const Eigen::Matrix3d d = plate_orthotropic_matrix(params);
  const Eigen::Vector3d mu_diag{params.mu, params.mu, 0.5 * params.mu};
  const Eigen::Vector3d ones{1.0, 1.0, 0.0};
  ConstitutiveLaw law;
  law.name = "plate_anisotropic";
  law.dim = 3;
  law.eval = [=](const Vector& eps) -> Vector {
    const double tr = eps(0) + eps(1);
    return params.lambda * plate_g(tr, params) * ones + mu_diag.cwiseProduct(Eigen::Vector3d(eps)) +
           d * eps;
  };
  law.tangent = [=](const Vector& eps) -> Matrix {
    const double tr = eps(0) + eps(1);
    const double dg = params.p * std::pow(std::abs(tr) + params.a, params.p - 1.0);
    Matrix k = params.lambda * dg * ones * ones.transpose();
    k += Matrix(mu_diag.asDiagonal());
    k += d;
    return k;
  };
  return law;
}

std::size_t lattice_tower_node_count(int levels, int bays) {
  const auto per_layer = static_cast<std::size_t>((bays + 1) * (bays + 1));
  return static_cast<std::size_t>(levels + 1) * per_layer;
}

std::size_t lattice_tower_bar_count(int levels, int bays) {
  const auto b = static_cast<std::size_t>(bays);
  return static_cast<std::size_t>(levels) * ((b + 1) * (b + 1) + 4 * b * (b + 1) + b * b);
}

namespace {

Model lattice_tower(const TrussSpec& spec) {
  if (spec.levels < 1 || spec.bays < 1) throw InvalidArgument("tower needs at least one level and one bay");
  if (!(spec.area > 0.0) || !(spec.bay_width > 0.0) || !(spec.storey_height > 0.0))
    throw InvalidArgument("tower dimensions must be positive");
  const int b = spec.bays;
  const int side = b + 1;
  Model m;
  m.spatial_dim = 3;
  auto id = [&](int level, int ix, int iy) -> Eigen::Index { return (level * side + iy) * side + ix; };
  for (int l = 0; l <= spec.levels; ++l)
    for (int iy = 0; iy < side; ++iy)
      for (int ix = 0; ix < side; ++ix)
        m.nodes.push_back(Eigen::Vector3d(ix * spec.bay_width, iy * spec.bay_width, l * spec.storey_height));

  auto bar = [&](Eigen::Index i, Eigen::Index j) {
    m.elements.push_back({ElementType::Bar2, {i, j}, spec.area});
  };
  for (int l = 1; l <= spec.levels; ++l) {
    for (int iy = 0; iy < side; ++iy)
      for (int ix = 0; ix < side; ++ix) bar(id(l - 1, ix, iy), id(l, ix, iy));
    for (int iy = 0; iy < side; ++iy)
      for (int ix = 0; ix < b; ++ix) bar(id(l - 1, ix, iy), id(l, ix + 1, iy));
    for (int ix = 0; ix < side; ++ix)
      for (int iy = 0; iy < b; ++iy) bar(id(l - 1, ix, iy), id(l, ix, iy + 1));
    for (int iy = 0; iy < side; ++iy)
      for (int ix = 0; ix < b; ++ix) bar(id(l, ix, iy), id(l, ix + 1, iy));
    for (int ix = 0; ix < side; ++ix)
      for (int iy = 0; iy < b; ++iy) bar(id(l, ix, iy), id(l, ix, iy + 1));
    for (int iy = 0; iy < b; ++iy)
      for (int ix = 0; ix < b; ++ix) bar(id(l, ix, iy), id(l, ix + 1, iy + 1));
  }

  for (int iy = 0; iy < side; ++iy)
    for (int ix = 0; ix < side; ++ix)
      for (int c = 0; c < 3; ++c) m.supports.push_back({id(0, ix, iy), c, 0.0});

  const double top_share = spec.vertical_load / (side * side);
  for (int iy = 0; iy < side; ++iy)
    for (int ix = 0; ix < side; ++ix) m.loads.push_back({id(spec.levels, ix, iy), 2, -top_share});
  const double face_nodes = static_cast<double>(spec.levels * side);
  for (int l = 1; l <= spec.levels; ++l)
    for (int k = 0; k < side; ++k) {
      m.loads.push_back({id(l, 0, k), 0, spec.lateral_load / face_nodes});
      m.loads.push_back({id(l, k, 0), 1, 0.5 * spec.lateral_load / face_nodes});
    }
  m.metric = Matrix::Constant(1, 1, spec.youngs_modulus);
  return m;
}

}  // namespace

Model build_truss_model(const TrussSpec& spec) {
  Model m = spec.geometry_file ? load_model(*spec.geometry_file) : lattice_tower(spec);
  if (spec.target_linear_peak_strain) {
    if (!(*spec.target_linear_peak_strain > 0.0)) throw InvalidArgument("target strain must be positive");
    const Problem p = assemble_problem(m);
    Vector u;
    try {
      u = linear_solve(assemble_lhs(p), p.f, p.dirichlet);
    } catch (const SingularSystemError& e) {
      throw SingularSystemError(std::string("truss is a mechanism: ") + e.what(), e.zero_energy_modes());
    }
    double peak = 0.0;
    for (const auto& eps : element_strains(p, u)) peak = std::max(peak, eps.cwiseAbs().maxCoeff());
    if (peak > 0.0) {
      const double scale = *spec.target_linear_peak_strain / peak;
      for (auto& l : m.loads) l.value *= scale;
    }
  }
  return m;
}

Problem build_truss(const TrussSpec& spec) {
  const Model m = build_truss_model(spec);
  Problem p = assemble_problem(m);
  try {
    ConstrainedSolver check(assemble_lhs(p), [&] {
      std::vector<Eigen::Index> d;
      for (const auto& bc : p.dirichlet) d.push_back(bc.dof);
      return d;
    }());
  } catch (const SingularSystemError& e) {
    throw SingularSystemError(std::string("truss is a mechanism: ") + e.what(), e.zero_energy_modes());
  }
  return p;
}

Model build_plate_model(const PlateSpec& spec) {
  const double w = 0.5 * spec.width;
  const double h = 0.5 * spec.height;
  const double r = spec.hole_radius;
  if (!(r > 0.0) || !(r < std::min(w, h))) throw InvalidArgument("hole radius must be in (0, min(width, height)/2)");
  if (spec.density < 1) throw InvalidArgument("mesh density must be >= 1");
  if (!(spec.grading > 0.0) || !(spec.thickness > 0.0)) throw InvalidArgument("grading and thickness must be positive");

  const int d = spec.density;
  const int n_ang = 2 * d;
  Model m;
  m.spatial_dim = 2;
  auto id = [&](int i, int j) -> Eigen::Index { return i * (d + 1) + j; };
  for (int i = 0; i <= n_ang; ++i) {
    const double theta = 0.5 * std::numbers::pi * i / n_ang;
    const Eigen::Vector2d inner(r * std::cos(theta), r * std::sin(theta));
    const Eigen::Vector2d outer = i <= d ? Eigen::Vector2d(w, h * i / d) : Eigen::Vector2d(w * (n_ang - i) / d, h);
    for (int j = 0; j <= d; ++j) {
      const double s = spec.grading == 1.0
                           ? static_cast<double>(j) / d
                           : (std::pow(spec.grading, j) - 1.0) / (std::pow(spec.grading, d) - 1.0);
      m.nodes.push_back((1.0 - s) * inner + s * outer);
    }
  }
  for (int i = 0; i < n_ang; ++i)
    for (int j = 0; j < d; ++j)
      m.elements.push_back({ElementType::Quad4, {id(i, j), id(i, j + 1), id(i + 1, j + 1), id(i + 1, j)}, spec.thickness});

  for (int j = 0; j <= d; ++j) {
    m.supports.push_back({id(0, j), 1, 0.0});      // y = 0 edge
    m.supports.push_back({id(n_ang, j), 0, 0.0});  // x = 0 edge
  }
  for (int i = d; i < n_ang; ++i) {
    const double len = (m.nodes[static_cast<std::size_t>(id(i, d))] - m.nodes[static_cast<std::size_t>(id(i + 1, d))]).norm();
    const double share = 0.5 * spec.traction * len * spec.thickness;
    m.loads.push_back({id(i, d), 1, share});
    m.loads.push_back({id(i + 1, d), 1, share});
  }
  m.metric = MetricTensor::plane_strain(spec.youngs_modulus, spec.poisson).c();
  return m;
}

Problem build_plate(const PlateSpec& spec) { return assemble_problem(build_plate_model(spec)); }

}  // namespace ddcm
