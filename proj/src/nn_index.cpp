#include "pcrk/nn_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcrk {

namespace {

constexpr int kLeafSize = 16;

// Heap ordering: front holds the current worst candidate, where "worse" is
// larger distance, ties going to the larger index. That makes equal-distance
// lower-index points win, matching a brute-force scan.
inline bool better(const std::pair<double, int>& a, const std::pair<double, int>& b) {
  return a.first < b.first || (a.first == b.first && a.second < b.second);
}

}  // namespace

NnIndex::NnIndex(const PointCloud& cloud) : pts_(cloud.points) {
  for (const auto& p : pts_)
    if (!p.allFinite()) throw std::invalid_argument("NnIndex: non-finite point");
  order_.resize(pts_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!pts_.empty()) {
    nodes_.reserve(2 * pts_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(pts_.size()));
  }
}

int NnIndex::build(int begin, int end) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  Eigen::Vector3d lo = pts_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_[order_[i]]);
    hi = hi.cwiseMax(pts_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = pts_[a][axis], cb = pts_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  node.axis = axis;
  node.split = pts_[order_[mid]][axis];
  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void NnIndex::search(int node_id, const Eigen::Vector3d& q, int k,
                     std::vector<std::pair<double, int>>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[i];
      const std::pair<double, int> cand{squared_distance(q, pts_[idx]), idx};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), better);
      } else if (better(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), better);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), better);
      }
    }
    return;
  }

  const double diff = q[node.axis] - node.split;
  const int near = diff <= 0.0 ? node.left : node.right;
  const int far = diff <= 0.0 ? node.right : node.left;
  search(near, q, k, heap);
  // Equal-distance points beyond the plane can still displace the current
  // worst via the index tie-break, so only skip on a strict excess.
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().first)
    search(far, q, k, heap);
}

std::vector<Neighbor> NnIndex::knn(const Eigen::Vector3d& q, int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > pts_.size())
    throw std::invalid_argument("knn: k must be in [1, cloud size]");
  if (!q.allFinite()) throw std::invalid_argument("knn: non-finite query");

  std::vector<std::pair<double, int>> heap;
  heap.reserve(k);
  search(root_, q, k, heap);
  std::sort(heap.begin(), heap.end(), better);
  std::vector<Neighbor> out(heap.size());
  for (std::size_t i = 0; i < heap.size(); ++i)
    out[i] = Neighbor{heap[i].second, std::sqrt(heap[i].first)};
  return out;
}

Neighbor NnIndex::nearest(const Eigen::Vector3d& q) const { return knn(q, 1)[0]; }

std::pair<int, double> NnIndex::nearest_sq(const Eigen::Vector3d& q) const {
  if (pts_.empty()) throw std::invalid_argument("nearest_sq: empty index");
  if (!q.allFinite()) throw std::invalid_argument("nearest_sq: non-finite query");
  std::vector<std::pair<double, int>> heap;
  heap.reserve(1);
  search(root_, q, 1, heap);
  return {heap[0].second, heap[0].first};
}

std::vector<Neighbor> knn_query(const PointCloud& cloud, const Eigen::Vector3d& q, int k) {
  return NnIndex(cloud).knn(q, k);
}

}  // namespace pcrk
