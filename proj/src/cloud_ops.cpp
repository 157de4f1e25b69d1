#include "pcrk/cloud_ops.hpp"

#include <numeric>
#include <stdexcept>

namespace pcrk {

NormalizeResult normalize_unit(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("normalize_unit: empty cloud");
  if (!all_finite(cloud)) throw std::invalid_argument("normalize_unit: non-finite point");

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(cloud.size());

  Eigen::Vector3d lo = cloud.points[0], hi = cloud.points[0];
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = (hi - lo).maxCoeff();
  if (scale <= 0.0)
    throw std::invalid_argument("normalize_unit: degenerate cloud (zero extent on every axis)");

  NormalizeResult out;
  out.centroid = centroid;
  out.scale = scale;
  out.cloud.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.cloud.points.push_back((p - centroid) / scale);
  return out;
}

PointCloud sample_fixed_n(const PointCloud& cloud, std::size_t n, SeededRng& rng) {
  if (n == 0) throw std::invalid_argument("sample_fixed_n: n must be positive");
  if (cloud.empty()) throw std::invalid_argument("sample_fixed_n: empty cloud");

  PointCloud out;
  out.points.reserve(n);
  const std::size_t m = cloud.size();
  if (n <= m) {
    // Partial Fisher-Yates: draw n distinct indices uniformly.
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + rng.below(m - i);
      std::swap(idx[i], idx[j]);
      out.points.push_back(cloud.points[idx[i]]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.points.push_back(cloud.points[rng.below(m)]);
  }
  return out;
}

}  // namespace pcrk
