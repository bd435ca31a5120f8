#pragma once

#include "ddcm/fem_core.hpp"

#include <filesystem>
#include <vector>

namespace ddcm {

enum class ElementType { Bar2, Quad4 };

struct ModelElement {
  ElementType type;
  std::vector<Eigen::Index> nodes;
  double section;  // bar area (mm^2) or quad thickness (mm)
};

/// Nodal load or prescribed displacement component.
struct NodalValue {
  Eigen::Index node;
  int component;
  double value;
};

/// Mesh-level description of a benchmark: nodes, elements, loads, supports
/// and the phase-space metric shared by all material points.
struct Model {
  int spatial_dim = 3;
  std::vector<Vector> nodes;
  std::vector<ModelElement> elements;
  std::vector<NodalValue> loads;
  std::vector<NodalValue> supports;
  Matrix metric;

  Eigen::Index n_dofs() const { return spatial_dim * static_cast<Eigen::Index>(nodes.size()); }
  Eigen::Index dof(Eigen::Index node, int component) const { return node * spatial_dim + component; }
};

/// Bars give one material point each; quads give four (2x2 Gauss).
Problem assemble_problem(const Model& model);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace ddcm
