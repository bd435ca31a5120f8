#pragma once

#include "ddcm/constitutive_law.hpp"
#include "ddcm/problem_io.hpp"

#include <filesystem>
#include <optional>

namespace ddcm {

/// sigma = sigma_y tanh(E eps / sigma_y), admissible for |eps| <= 0.03.
struct TrussLawParams {
  double youngs_modulus = 100000.0;
  double yield_stress = 1000.0;
  double admissible_strain = 0.03;
};
ConstitutiveLaw truss_reference_law(const TrussLawParams& params = {});

/// Nonlinear anisotropic plane-strain law
///   sigma = lambda g(tr eps) I + mu eps + D eps,
///   g(x) = ((|x| + a)^p - a^p) sign(x),
/// in Voigt form with engineering shear: mu eps contributes mu * gamma / 2 to
/// the shear stress, D acts on the Voigt strain vector.
struct PlateLawParams {
  double lambda = 57692.31;
  double mu = 38461.54;
  double a = 0.001;
  double p = 0.005;
  double youngs_modulus = 100000.0;
  double poisson = 0.3;
};
ConstitutiveLaw plate_reference_law(const PlateLawParams& params = {});
double plate_g(double x, const PlateLawParams& params = {});
Eigen::Matrix3d plate_orthotropic_matrix(const PlateLawParams& params = {});

/// Braced rectangular tower: (levels + 1) layers of (bays + 1)^2 nodes.
/// Per storey: (bays+1)^2 columns, 2 bays (bays+1) face diagonals,
/// 2 bays (bays+1) horizontal edges and bays^2 floor diagonals in the upper
/// layer. Base nodes are pinned.
///   nodes = (levels + 1)(bays + 1)^2
///   bars  = levels [ (bays+1)^2 + 4 bays (bays+1) + bays^2 ]
struct TrussSpec {
  int levels = 45;
  int bays = 2;
  double bay_width = 1000.0;      // mm
  double storey_height = 1000.0;  // mm
  double area = 100.0;            // mm^2
  double youngs_modulus = 100000.0;
  /// Total downward load shared by the top-layer nodes (N).
  double vertical_load = 1.0;
  /// Total lateral load in +x shared by the nodes of the x = 0 face above the
  /// base; half of it is also applied in +y on the y = 0 face (N).
  double lateral_load = 1.0;
  /// When set, both loads are scaled so the linear-elastic response (with E)
  /// reaches this peak |strain|.
  std::optional<double> target_linear_peak_strain = 0.008;
  /// Geometry file replacing the generated tower when set.
  std::optional<std::filesystem::path> geometry_file;
};

std::size_t lattice_tower_node_count(int levels, int bays);
std::size_t lattice_tower_bar_count(int levels, int bays);

Model build_truss_model(const TrussSpec& spec);
Problem build_truss(const TrussSpec& spec);

/// Quarter of a plate with a central hole under remote tension q on the top
/// edge. The quarter spans [0, width/2] x [0, height/2]; the hole is centered
/// at the origin. Structured mesh: 2 * density elements around the hole and
/// density elements radially, graded geometrically toward the hole.
struct PlateSpec {
  double width = 100.0;
  double height = 100.0;
  double hole_radius = 25.0;
  double traction = 200.0;  // MPa
  double thickness = 1.0;
  int density = 7;
  double grading = 1.2;  // ratio of successive radial element sizes
  double youngs_modulus = 100000.0;
  double poisson = 0.3;
};

Model build_plate_model(const PlateSpec& spec);
Problem build_plate(const PlateSpec& spec);

}  // namespace ddcm
