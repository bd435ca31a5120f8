#include "ddcm/material_data.hpp"

#include "ddcm/errors.hpp"
#include "ddcm/text_io.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ddcm {

namespace {

std::shared_ptr<const KdTree> build_tree(const std::vector<LocalState>& points,
                                         const MetricTensor& metric) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd coords(2 * metric.dim(), n);
  for (Eigen::Index i = 0; i < n; ++i)
    coords.col(i) = to_learning_space(points[static_cast<std::size_t>(i)], metric);
  return std::make_shared<const KdTree>(std::move(coords));
}

}  // namespace

MaterialDataSet::MaterialDataSet(std::vector<LocalState> points, MetricTensor metric)
    : points_(std::move(points)), metric_(std::move(metric)) {
  if (points_.empty()) throw InvalidArgument("material data set must contain at least one point");
  for (const auto& p : points_) {
    if (p.strain.size() != metric_.dim() || p.stress.size() != metric_.dim())
      throw DimensionError("data point dimension does not match metric");
    if (!p.strain.allFinite() || !p.stress.allFinite())
      throw InvalidArgument("data point has non-finite entries");
  }
  tree_ = build_tree(points_, metric_);
}

const std::vector<TangentFrame>& MaterialDataSet::frames() const {
  if (!frames_) throw InvalidArgument("data set has no tangent frames; run voting first");
  return *frames_;
}

MaterialDataSet MaterialDataSet::with_frames(std::vector<TangentFrame> frames) const {
  if (frames.size() != size()) throw DimensionError("frame count differs from point count");
  for (const auto& f : frames)
    if (f.basis.rows() != 2 * dim() || f.basis.cols() != 2 * dim())
      throw DimensionError("frame size does not match learning-space dimension");
  MaterialDataSet out = *this;
  out.frames_ = std::move(frames);
  return out;
}

MaterialDataSet sample_dataset(const DataGenSpec& spec) {
  if (spec.count == 0) throw InvalidArgument("count must be positive");
  if (!(spec.noise_stddev_fraction >= 0.0)) throw InvalidArgument("noise fraction must be >= 0");
  if (spec.law.dim != spec.metric.dim()) throw DimensionError("law and metric dimensions differ");
  if (!(spec.strain_bound > 0.0)) throw InvalidArgument("strain bound must be positive");

  const Eigen::Index m = spec.law.dim;
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> uniform(-spec.strain_bound, spec.strain_bound);
  std::normal_distribution<double> normal(0.0, spec.strain_bound);

  std::vector<LocalState> points;
  points.reserve(spec.count);
  if (spec.sampling == StrainSampling::Grid) {
    const auto q = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(spec.count), 1.0 / m)));
    std::size_t total = 1;
    for (Eigen::Index c = 0; c < m; ++c) total *= q;
    if (total != spec.count) throw InvalidArgument("grid sampling needs count = q^m");
    auto coord = [&](std::size_t k) {
      return q == 1 ? 0.0 : -spec.strain_bound + 2.0 * spec.strain_bound * static_cast<double>(k) / (q - 1);
    };
    for (std::size_t i = 0; i < spec.count; ++i) {
      Vector eps(m);
      std::size_t rest = i;
      for (Eigen::Index c = 0; c < m; ++c) {
        eps(c) = coord(rest % q);
        rest /= q;
      }
      points.emplace_back(eps, Vector::Zero(m));
    }
  }
  for (std::size_t i = points.size(); i < spec.count; ++i) {
    Vector eps(m);
    for (Eigen::Index c = 0; c < m; ++c)
      eps(c) = spec.sampling == StrainSampling::Uniform ? uniform(rng) : normal(rng);
    points.emplace_back(eps, Vector::Zero(m));
  }
  for (auto& p : points) p.stress = spec.law.stress(p.strain);

  if (spec.noise_stddev_fraction > 0.0) {
    Vector max_eps = Vector::Zero(m);
    Vector max_sig = Vector::Zero(m);
    for (const auto& p : points) {
      max_eps = max_eps.cwiseMax(p.strain.cwiseAbs());
      max_sig = max_sig.cwiseMax(p.stress.cwiseAbs());
    }
    std::normal_distribution<double> unit(0.0, 1.0);
    for (auto& p : points) {
      for (Eigen::Index c = 0; c < m; ++c) p.strain(c) += spec.noise_stddev_fraction * max_eps(c) * unit(rng);
      for (Eigen::Index c = 0; c < m; ++c) p.stress(c) += spec.noise_stddev_fraction * max_sig(c) * unit(rng);
    }
  }
  return MaterialDataSet(std::move(points), spec.metric);
}

std::pair<std::size_t, double> nearest_neighbor(const MaterialDataSet& ds, const LocalState& z) {
  const Vector q = to_learning_space(z, ds.metric());
  const Neighbor nn = ds.tree().nearest(q);
  return {nn.index, local_distance(z, ds.point(nn.index), ds.metric())};
}

std::vector<std::size_t> k_nearest_neighbors(const MaterialDataSet& ds, std::size_t i, std::size_t k) {
  if (i >= ds.size()) throw InvalidArgument("point index out of range");
  if (k == 0 || k + 1 > ds.size()) throw InvalidArgument("k must be in [1, n-1]");
  const auto nbrs = ds.tree().k_nearest(ds.learning_point(i), k, i);
  std::vector<std::size_t> out;
  out.reserve(nbrs.size());
  for (const auto& nb : nbrs) out.push_back(nb.index);
  return out;
}

double mean_squared_nn_distance(const MaterialDataSet& ds) {
  if (ds.size() < 2) throw InvalidArgument("need at least two points for a spacing estimate");
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    sum += 0.5 * ds.tree().k_nearest(ds.learning_point(i), 1, i).front().distance_squared;
  return sum / static_cast<double>(ds.size());
}

// File layout:
//   ddcm-dataset 1
//   dim <m>  count <n>
//   metric <m*m entries, row-major>
//   frames <0|n>
//   data
//   one row per point: eps_1..eps_m sig_1..sig_m
//     [basis (2m x 2m, column-major) eigenvalues (2m) k degenerate]
void save_dataset(const MaterialDataSet& ds, const std::filesystem::path& path) {
  using text::format_double;
  std::ostringstream out;
  const Eigen::Index m = ds.dim();
  out << "ddcm-dataset 1\n";
  out << "dim " << m << "\ncount " << ds.size() << "\nmetric";
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) out << ' ' << format_double(ds.metric().c()(r, c));
  out << "\nframes " << (ds.has_frames() ? ds.size() : 0) << "\ndata\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& p = ds.point(i);
    bool first = true;
    auto put = [&](double v) {
      if (!first) out << ' ';
      out << format_double(v);
      first = false;
    };
    for (Eigen::Index c = 0; c < m; ++c) put(p.strain(c));
    for (Eigen::Index c = 0; c < m; ++c) put(p.stress(c));
    if (ds.has_frames()) {
      const auto& f = ds.frame(i);
      for (Eigen::Index c = 0; c < f.basis.cols(); ++c)
        for (Eigen::Index r = 0; r < f.basis.rows(); ++r) put(f.basis(r, c));
      for (Eigen::Index c = 0; c < f.eigenvalues.size(); ++c) put(f.eigenvalues(c));
      out << ' ' << f.k << ' ' << (f.degenerate ? 1 : 0);
    }
    out << '\n';
  }
  text::write_file(path, out.str());
}

MaterialDataSet load_dataset(const std::filesystem::path& path) {
  auto in = text::TokenReader::from_file(path);
  in.expect("ddcm-dataset");
  if (in.next_int() != 1) in.fail("unsupported dataset version");
  in.expect("dim");
  const auto m = static_cast<Eigen::Index>(in.next_count());
  if (m == 0) in.fail("dimension must be positive");
  in.expect("count");
  const std::size_t n = in.next_count();
  in.expect("metric");
  Matrix c(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index col = 0; col < m; ++col) c(r, col) = in.next_double();
  in.expect("frames");
  const std::size_t n_frames = in.next_count();
  if (n_frames != 0 && n_frames != n)
    throw DimensionError(path.string() + ": frame count " + std::to_string(n_frames) +
                         " does not match point count " + std::to_string(n));
  in.expect("data");

  std::vector<LocalState> points;
  std::vector<TangentFrame> frames;
  points.reserve(n);
  const Eigen::Index big_n = 2 * m;
  for (std::size_t i = 0; i < n; ++i) {
    Vector eps(m), sig(m);
    for (Eigen::Index k = 0; k < m; ++k) eps(k) = in.next_double();
    for (Eigen::Index k = 0; k < m; ++k) sig(k) = in.next_double();
    points.emplace_back(std::move(eps), std::move(sig));
    if (n_frames > 0) {
      TangentFrame f;
      f.basis.resize(big_n, big_n);
      for (Eigen::Index col = 0; col < big_n; ++col)
        for (Eigen::Index r = 0; r < big_n; ++r) f.basis(r, col) = in.next_double();
      f.eigenvalues.resize(big_n);
      for (Eigen::Index k = 0; k < big_n; ++k) f.eigenvalues(k) = in.next_double();
      const auto k = in.next_int();
      if (k < 1 || k >= big_n) in.fail("tangent count out of range");
      f.k = static_cast<int>(k);
      f.degenerate = in.next_int() != 0;
      frames.push_back(std::move(f));
    }
  }
  if (!in.at_end()) in.fail("trailing content after " + std::to_string(n) + " rows");

  MaterialDataSet ds(std::move(points), MetricTensor(c));
  if (n_frames > 0) return ds.with_frames(std::move(frames));
  return ds;
}

}  // namespace ddcm
