#pragma once

#include <vector>

#include "pcrk/projection.hpp"
#include "pcrk/types.hpp"

namespace pcrk {

struct LossWeights {
  double rec = 1.0;
  double silhouette = 1e-9;
  double proj = 1e-10;
};

struct LossResult {
  double value = 0.0;
  // d value / d predicted point, aligned with the prediction; empty unless
  // gradients were requested.
  std::vector<Eigen::Vector3d> grad;
};

struct LossBreakdown {
  double total = 0.0;
  double rec = 0.0;
  double silhouette = 0.0;
  double proj = 0.0;
  std::vector<Eigen::Vector3d> grad;  // d total / d predicted point
};

// 3D chamfer between ground truth and prediction (both directions, squared).
// At a nearest-neighbor tie the subgradient of the lowest predicted index is
// taken, matching the nearest-neighbor tie-break everywhere else.
LossResult loss_rec(const PointCloud& gt, const PointCloud& pred, bool with_grad);

// One-directional 2D chamfer, summed over views: for each view, the mean over
// projected ground-truth points of the squared distance to the nearest
// projected prediction. Prediction-only points cost nothing, so unobserved
// (occluded) structure is not penalized.
LossResult loss_proj(const PointCloud& gt, const PointCloud& pred,
                     const std::vector<ViewSpec>& views, bool with_grad);

// Mean over foreground pixel centers of the squared distance to the nearest
// perspective projection of the prediction. Throws std::invalid_argument on a
// mask with no foreground.
LossResult loss_silhouette(const BinaryMask& mask, const PointCloud& pred, const Camera& cam,
                           bool with_grad);

double combine_components(const LossWeights& w, double rec, double silhouette, double proj);

// Weighted sum of the three terms. mask/cam may be null, dropping the
// silhouette term (component reported as 0).
LossBreakdown loss_total(const PointCloud& gt, const PointCloud& pred, const BinaryMask* mask,
                         const Camera* cam, const std::vector<ViewSpec>& views,
                         const LossWeights& w, bool with_grad);

// {OrthoXY, OrthoXZ}
std::vector<ViewSpec> default_proj_views();

}  // namespace pcrk
