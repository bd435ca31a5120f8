#pragma once

#include "ddcm/constitutive_law.hpp"
#include "ddcm/kd_tree.hpp"
#include "ddcm/phase_space.hpp"
#include "ddcm/tangent_frame.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace ddcm {

/// Finite point cloud of strain-stress pairs for one material, together with
/// the metric it is searched in and, after voting, one tangent frame per point.
class MaterialDataSet {
 public:
  MaterialDataSet(std::vector<LocalState> points, MetricTensor metric);

  std::size_t size() const { return points_.size(); }
  Eigen::Index dim() const { return metric_.dim(); }
  const MetricTensor& metric() const { return metric_; }
  const std::vector<LocalState>& points() const { return points_; }
  const LocalState& point(std::size_t i) const { return points_[i]; }

  /// Learning-space coordinates, one column per point.
  const Eigen::MatrixXd& learning_points() const { return tree_->points(); }
  auto learning_point(std::size_t i) const {
    return learning_points().col(static_cast<Eigen::Index>(i));
  }
  const KdTree& tree() const { return *tree_; }

  bool has_frames() const { return frames_.has_value(); }
  const std::vector<TangentFrame>& frames() const;
  const TangentFrame& frame(std::size_t i) const { return frames().at(i); }

  /// Copy sharing the search structure, with frames attached.
  MaterialDataSet with_frames(std::vector<TangentFrame> frames) const;

 private:
  std::vector<LocalState> points_;
  MetricTensor metric_;
  std::shared_ptr<const KdTree> tree_;
  std::optional<std::vector<TangentFrame>> frames_;
};

/// Grid: equispaced strains on [-strain_bound, strain_bound] per component;
/// count must be q^m for some integer q.
enum class StrainSampling { Uniform, Normal, Grid };

/// How to synthesize a data set from a reference law.
struct DataGenSpec {
  ConstitutiveLaw law;
  MetricTensor metric;
  std::size_t count = 100;
  StrainSampling sampling = StrainSampling::Uniform;
  /// Uniform mode: strains in [-strain_bound, strain_bound] per component.
  /// Normal mode: zero-mean with standard deviation strain_bound.
  double strain_bound = 0.025;
  /// Gaussian noise stddev as a fraction of the max |component| over the
  /// noise-free sample, applied to every strain and stress component.
  double noise_stddev_fraction = 0.0;
  std::uint64_t rng_seed = 0;
};

MaterialDataSet sample_dataset(const DataGenSpec& spec);

/// Index of the closest point under the metric, and that distance.
std::pair<std::size_t, double> nearest_neighbor(const MaterialDataSet& ds, const LocalState& z);

/// The k points closest to point i in learning space, excluding i itself,
/// ascending by distance with ties to the lower index.
std::vector<std::size_t> k_nearest_neighbors(const MaterialDataSet& ds, std::size_t i,
                                             std::size_t k);

/// Mean over points of the squared metric distance to the nearest other point.
double mean_squared_nn_distance(const MaterialDataSet& ds);

void save_dataset(const MaterialDataSet& ds, const std::filesystem::path& path);
MaterialDataSet load_dataset(const std::filesystem::path& path);

}  // namespace ddcm
