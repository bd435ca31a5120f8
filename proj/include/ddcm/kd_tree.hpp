#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace ddcm {

/// A neighbor candidate: point index and squared Euclidean distance.
struct Neighbor {
  std::size_t index;
  double distance_squared;
};

/// Exact Euclidean search structure over a fixed point set. Ties are broken
/// by the lower point index. Above `kMaxTreeDimension` coordinates the tree
/// degenerates to a single leaf, i.e. an exhaustive scan.
class KdTree {
 public:
  static constexpr Eigen::Index kMaxTreeDimension = 12;

  KdTree() = default;
  /// `points` holds one point per column.
  explicit KdTree(Eigen::MatrixXd points, std::size_t leaf_size = 8);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  Eigen::Index dim() const { return points_.rows(); }
  const Eigen::MatrixXd& points() const { return points_; }

  Neighbor nearest(const Eigen::Ref<const Eigen::VectorXd>& query) const;

  /// The k nearest points, ascending by (distance, index). `exclude` removes
  /// one index from consideration (pass size() to exclude nothing).
  std::vector<Neighbor> k_nearest(const Eigen::Ref<const Eigen::VectorXd>& query, std::size_t k,
                                  std::size_t exclude) const;

  /// All points with squared distance <= radius_squared, ascending by index.
  std::vector<Neighbor> within_radius(const Eigen::Ref<const Eigen::VectorXd>& query,
                                      double radius_squared) const;

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    Eigen::Index axis = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  int build(std::size_t begin, std::size_t end);
  double distance_squared(std::size_t point, const Eigen::Ref<const Eigen::VectorXd>& q) const;

  Eigen::MatrixXd points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 8;
};

}  // namespace ddcm
