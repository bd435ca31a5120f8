#include "ddcm/kd_tree.hpp"

#include "ddcm/errors.hpp"

#include <algorithm>
#include <queue>

namespace ddcm {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance_squared < b.distance_squared ||
         (a.distance_squared == b.distance_squared && a.index < b.index);
}

}  // namespace

KdTree::KdTree(Eigen::MatrixXd points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  order_.resize(size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) build(0, order_.size());
}

int KdTree::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_ || dim() > kMaxTreeDimension || dim() == 0) return id;

  // split along the axis of largest spread
  Eigen::Index axis = 0;
  double best_spread = -1.0;
  for (Eigen::Index a = 0; a < dim(); ++a) {
    double lo = points_(a, order_[begin]);
    double hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      lo = std::min(lo, points_(a, order_[i]));
      hi = std::max(hi, points_(a, order_[i]));
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      axis = a;
    }
  }
  if (best_spread <= 0.0) return id;  // all coincident: keep as leaf

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return points_(axis, a) < points_(axis, b); });
  const double split = points_(axis, order_[mid]);

  const int left = build(begin, mid);
  const int right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

double KdTree::distance_squared(std::size_t point, const Eigen::Ref<const Eigen::VectorXd>& q) const {
  return (points_.col(static_cast<Eigen::Index>(point)) - q).squaredNorm();
}

Neighbor KdTree::nearest(const Eigen::Ref<const Eigen::VectorXd>& query) const {
  auto result = k_nearest(query, 1, size());
  return result.front();
}

std::vector<Neighbor> KdTree::k_nearest(const Eigen::Ref<const Eigen::VectorXd>& query,
                                        std::size_t k, std::size_t exclude) const {
  if (query.size() != dim()) throw DimensionError("query dimension does not match tree");
  const std::size_t available = size() - (exclude < size() ? 1 : 0);
  if (k == 0 || k > available) throw InvalidArgument("k out of range for neighbor query");

  // max-heap on (distance, index): top is the current worst accepted neighbor
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(&closer)> heap(&closer);

  auto visit = [&](auto&& self, int node_id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t p = order_[i];
        if (p == exclude) continue;
        const Neighbor cand{p, distance_squared(p, query)};
        if (heap.size() < k) {
          heap.push(cand);
        } else if (closer(cand, heap.top())) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }
    const double diff = query(node.axis) - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    if (heap.size() < k || diff * diff <= heap.top().distance_squared) self(self, far);
  };
  visit(visit, 0);

  std::vector<Neighbor> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<Neighbor> KdTree::within_radius(const Eigen::Ref<const Eigen::VectorXd>& query,
                                            double radius_squared) const {
  if (query.size() != dim()) throw DimensionError("query dimension does not match tree");
  std::vector<Neighbor> out;
  if (size() == 0) return out;
  auto visit = [&](auto&& self, int node_id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const double d2 = distance_squared(order_[i], query);
        if (d2 <= radius_squared) out.push_back({order_[i], d2});
      }
      return;
    }
    const double diff = query(node.axis) - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    if (diff * diff <= radius_squared) self(self, far);
  };
  visit(visit, 0);
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  return out;
}

}  // namespace ddcm
