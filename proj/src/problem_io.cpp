#include "ddcm/problem_io.hpp"

#include "ddcm/errors.hpp"
#include "ddcm/text_io.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace ddcm {

Problem assemble_problem(const Model& model) {
  if (model.spatial_dim != 2 && model.spatial_dim != 3)
    throw InvalidArgument("spatial dimension must be 2 or 3");
  if (model.elements.empty()) throw InvalidArgument("model has no elements");
  for (const auto& x : model.nodes)
    if (x.size() != model.spatial_dim) throw DimensionError("node coordinate size differs from spatial dimension");

  const MetricTensor metric(model.metric);
  Problem p;
  p.n_dofs = model.n_dofs();
  p.f = Vector::Zero(p.n_dofs);

  auto node = [&](Eigen::Index i) -> const Vector& {
    if (i < 0 || static_cast<std::size_t>(i) >= model.nodes.size())
      throw InvalidArgument("element references node " + std::to_string(i) + " out of range");
    return model.nodes[static_cast<std::size_t>(i)];
  };

  const double g = 1.0 / std::sqrt(3.0);
  for (const auto& el : model.elements) {
    if (el.type == ElementType::Bar2) {
      if (el.nodes.size() != 2) throw InvalidArgument("bar2 needs two nodes");
      if (metric.dim() != 1) throw DimensionError("bar elements need a 1x1 metric");
      const auto op = build_B_bar(node(el.nodes[0]), node(el.nodes[1]), el.section);
      ElementOperator e{op.b, op.weight, {}, 0.5 * (node(el.nodes[0]) + node(el.nodes[1]))};
      for (auto n : el.nodes)
        for (int c = 0; c < model.spatial_dim; ++c) e.dofs.push_back(model.dof(n, c));
      p.elements.push_back(std::move(e));
    } else {
      if (el.nodes.size() != 4) throw InvalidArgument("quad4 needs four nodes");
      if (model.spatial_dim != 2) throw InvalidArgument("quad4 elements need a 2D model");
      if (metric.dim() != 3) throw DimensionError("plane-strain elements need a 3x3 metric");
      Eigen::Matrix<double, 4, 2> coords;
      for (int a = 0; a < 4; ++a) coords.row(a) = node(el.nodes[static_cast<std::size_t>(a)]).transpose();
      for (double eta : {-g, g})
        for (double xi : {-g, g}) {
          const auto op = build_B_quad4(coords, xi, eta, 1.0, el.section);
          const Eigen::Vector4d n{0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                                  0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
          ElementOperator e{op.b, op.weight, {}, (coords.transpose() * n)};
          for (auto nd : el.nodes)
            for (int c = 0; c < 2; ++c) e.dofs.push_back(model.dof(nd, c));
          p.elements.push_back(std::move(e));
        }
    }
  }
  for (const auto& l : model.loads) {
    if (l.component < 0 || l.component >= model.spatial_dim) throw InvalidArgument("load component out of range");
    node(l.node);
    p.f(model.dof(l.node, l.component)) += l.value;
  }
  for (const auto& s : model.supports) {
    if (s.component < 0 || s.component >= model.spatial_dim) throw InvalidArgument("support component out of range");
    node(s.node);
    p.dirichlet.push_back({model.dof(s.node, s.component), s.value});
  }
  p.metrics.assign(p.elements.size(), metric);
  p.validate();
  return p;
}

// ddcm-model 1
// dim <2|3>
// metric scalar <c0> | metric plane_strain <E> <nu> | metric matrix <m> <m*m entries>
// nodes <N>      then N rows of coordinates (mm)
// elements <M>   then rows "bar2 i j area" or "quad4 i j k l thickness"
// loads <L>      then rows "node component value" (N)
// supports <S>   then rows "node component value" (mm)
void save_model(const Model& model, const std::filesystem::path& path) {
  using text::format_double;
  std::ostringstream out;
  out << "ddcm-model 1\ndim " << model.spatial_dim << "\nmetric matrix " << model.metric.rows();
  for (Eigen::Index r = 0; r < model.metric.rows(); ++r)
    for (Eigen::Index c = 0; c < model.metric.cols(); ++c) out << ' ' << format_double(model.metric(r, c));
  out << "\nnodes " << model.nodes.size() << '\n';
  for (const auto& x : model.nodes) {
    for (Eigen::Index c = 0; c < x.size(); ++c) out << (c ? " " : "") << format_double(x(c));
    out << '\n';
  }
  out << "elements " << model.elements.size() << '\n';
  for (const auto& el : model.elements) {
    out << (el.type == ElementType::Bar2 ? "bar2" : "quad4");
    for (auto n : el.nodes) out << ' ' << n;
    out << ' ' << format_double(el.section) << '\n';
  }
  auto put_values = [&](const char* name, const std::vector<NodalValue>& values) {
    out << name << ' ' << values.size() << '\n';
    for (const auto& v : values) out << v.node << ' ' << v.component << ' ' << format_double(v.value) << '\n';
  };
  put_values("loads", model.loads);
  put_values("supports", model.supports);
  text::write_file(path, out.str());
}

Model load_model(const std::filesystem::path& path) {
  auto in = text::TokenReader::from_file(path);
  in.expect("ddcm-model");
  if (in.next_int() != 1) in.fail("unsupported model version");
  Model m;
  in.expect("dim");
  m.spatial_dim = static_cast<int>(in.next_int());
  if (m.spatial_dim != 2 && m.spatial_dim != 3) in.fail("dim must be 2 or 3");

  in.expect("metric");
  const std::string kind = in.next();
  if (kind == "scalar") {
    m.metric = Matrix::Constant(1, 1, in.next_double());
  } else if (kind == "plane_strain") {
    const double e = in.next_double();
    const double nu = in.next_double();
    m.metric = MetricTensor::plane_strain(e, nu).c();
  } else if (kind == "matrix") {
    const auto size = static_cast<Eigen::Index>(in.next_count());
    if (size == 0) in.fail("metric size must be positive");
    m.metric.resize(size, size);
    for (Eigen::Index r = 0; r < size; ++r)
      for (Eigen::Index c = 0; c < size; ++c) m.metric(r, c) = in.next_double();
  } else {
    in.fail("unknown metric kind '" + kind + "'");
  }

  in.expect("nodes");
  const std::size_t n_nodes = in.next_count();
  for (std::size_t i = 0; i < n_nodes; ++i) {
    Vector x(m.spatial_dim);
    for (int c = 0; c < m.spatial_dim; ++c) x(c) = in.next_double();
    m.nodes.push_back(std::move(x));
  }
  in.expect("elements");
  const std::size_t n_el = in.next_count();
  for (std::size_t i = 0; i < n_el; ++i) {
    const std::string type = in.next();
    ModelElement el{};
    std::size_t count = 0;
    if (type == "bar2") {
      el.type = ElementType::Bar2;
      count = 2;
    } else if (type == "quad4") {
      el.type = ElementType::Quad4;
      count = 4;
    } else {
      in.fail("unknown element type '" + type + "'");
    }
    for (std::size_t k = 0; k < count; ++k) {
      const auto nd = in.next_int();
      if (nd < 0 || static_cast<std::size_t>(nd) >= n_nodes) in.fail("element node index out of range");
      el.nodes.push_back(nd);
    }
    el.section = in.next_double();
    m.elements.push_back(std::move(el));
  }
  auto read_values = [&](const char* name, std::vector<NodalValue>& values) {
    in.expect(name);
    const std::size_t n = in.next_count();
    for (std::size_t i = 0; i < n; ++i) {
      NodalValue v{};
      v.node = in.next_int();
      v.component = static_cast<int>(in.next_int());
      v.value = in.next_double();
      if (v.node < 0 || static_cast<std::size_t>(v.node) >= n_nodes) in.fail("node index out of range");
      if (v.component < 0 || v.component >= m.spatial_dim) in.fail("component out of range");
      values.push_back(v);
    }
  };
  read_values("loads", m.loads);
  read_values("supports", m.supports);
  if (!in.at_end()) in.fail("trailing content");
  return m;
}

}  // namespace ddcm
