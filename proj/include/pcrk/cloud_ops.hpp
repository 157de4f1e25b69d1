#pragma once

#include "pcrk/rng.hpp"
#include "pcrk/types.hpp"

namespace pcrk {

struct NormalizeResult {
  PointCloud cloud;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double scale = 1.0;
};

// Zero-centers the cloud at its centroid and divides by the longest
// axis-aligned bounding-box extent, so the result has unit length along its
// longest axis. Returns the transform so it can be inverted. Throws
// std::invalid_argument on an empty cloud or one with zero extent in every
// axis (degenerate: all points coincide).
NormalizeResult normalize_unit(const PointCloud& cloud);

// Draws exactly n points: a uniform subset without replacement when
// n <= cloud.size(), with replacement otherwise. n == cloud.size() yields a
// permutation of the input. Throws std::invalid_argument if n == 0 or the
// cloud is empty.
PointCloud sample_fixed_n(const PointCloud& cloud, std::size_t n, SeededRng& rng);

}  // namespace pcrk
