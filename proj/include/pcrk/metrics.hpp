#pragma once

#include <cstddef>
#include <optional>

#include "pcrk/types.hpp"

namespace pcrk {

// Sum of both directions' mean squared nearest-neighbor distances:
//   (1/|A|) sum_a min_b |a-b|^2  +  (1/|B|) sum_b min_a |a-b|^2.
// Throws std::invalid_argument on an empty cloud.
double chamfer(const PointCloud& a, const PointCloud& b);

// Same structure with plain Euclidean distances (no squaring); exposed for
// reporting styles that want unsquared values.
double chamfer_linear(const PointCloud& a, const PointCloud& b);

// Minimum over bijections of the mean Euclidean distance between matched
// pairs, solved exactly. Requires |a| == |b| >= 1; refuses inputs larger than
// cap (use emd_approx instead).
double emd_exact(const PointCloud& a, const PointCloud& b, std::size_t cap = 256);

// Auction algorithm with epsilon scaling. Guarantees
//   emd_exact - 1e-12 <= result <= emd_exact + epsilon * diameter,
// where diameter is the maximum pairwise distance over the union of both
// clouds. Requires |a| == |b| >= 1 and epsilon > 0.
double emd_approx(const PointCloud& a, const PointCloud& b, double epsilon);

// Intersection over union of two same-shaped masks; 1.0 when both are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

struct IouReport {
  double full = 0.0;      // pred_full vs gt_full
  double visible = 0.0;   // restricted to the gt_visible region
  std::optional<double> occluded;  // restricted to gt_full minus gt_visible; absent when that
                                   // region is empty
};

// Splits mask agreement into visible and occluded regions. gt_visible must be
// a subset of gt_full.
IouReport iou_report(const BinaryMask& pred_full, const BinaryMask& gt_full,
                     const BinaryMask& gt_visible);

}  // namespace pcrk
