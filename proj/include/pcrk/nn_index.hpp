#pragma once

#include <utility>
#include <vector>

#include "pcrk/types.hpp"

namespace pcrk {

struct Neighbor {
  int index = -1;
  double distance = 0.0;
};

// Exact kd-tree over an immutable copy of the cloud. Queries return true
// nearest neighbors; equal distances are broken by the lower point index, so
// results match a brute-force scan bit for bit.
class NnIndex {
 public:
  explicit NnIndex(const PointCloud& cloud);

  std::size_t size() const { return pts_.size(); }
  const Eigen::Vector3d& point(int i) const { return pts_[i]; }

  // k nearest neighbors of q, ascending by (distance, index).
  // Throws std::invalid_argument unless 1 <= k <= size().
  std::vector<Neighbor> knn(const Eigen::Vector3d& q, int k) const;

  Neighbor nearest(const Eigen::Vector3d& q) const;

  // Index and squared distance of the single nearest neighbor; avoids the
  // sqrt so squared-distance sums match a brute-force scan bitwise.
  std::pair<int, double> nearest_sq(const Eigen::Vector3d& q) const;

 private:
  struct Node {
    int axis = -1;         // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build(int begin, int end);
  void search(int node, const Eigen::Vector3d& q, int k,
              std::vector<std::pair<double, int>>& heap) const;

  std::vector<Eigen::Vector3d> pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

// One-shot helper for k nearest neighbors within `cloud`.
std::vector<Neighbor> knn_query(const PointCloud& cloud, const Eigen::Vector3d& q, int k);

}  // namespace pcrk
