#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pcrk/losses.hpp"
#include "pcrk/rng.hpp"
#include "pcrk/types.hpp"

namespace pcrk {

enum class InitMode { UnitSphere, UnitCube, FromCloud };

struct FitConfig {
  std::size_t n_points = 1024;
  std::size_t max_iters = 2000;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-6;
  LossWeights weights;
  std::vector<ViewSpec> views = default_proj_views();
  InitMode init = InitMode::UnitSphere;
  std::uint64_t seed = 0;
};

struct FitTrace {
  // Loss before each update (entry 0 is the initial state); gradients are
  // not retained.
  std::vector<LossBreakdown> iterations;
  double final_total = 0.0;  // loss after the last update
  PointCloud final_cloud;
};

// Thrown when the total loss stops being finite; carries the trace up to and
// the cloud at the last finite evaluation.
struct FitDivergence : std::runtime_error {
  explicit FitDivergence(FitTrace trace_)
      : std::runtime_error("fit: loss diverged (non-finite total)"), trace(std::move(trace_)) {}
  FitTrace trace;
};

// Deterministic initializations: points uniform on the unit sphere surface,
// uniform inside the centered unit cube, or resampled from a source cloud.
PointCloud init_points(std::size_t n, InitMode mode, SeededRng& rng,
                       const PointCloud* source = nullptr);

// Full-batch Adam on every free point coordinate against loss_total. mask and
// cam may be null (silhouette term dropped); init overrides the generated
// starting cloud when provided.
FitTrace fit(const PointCloud& target, const BinaryMask* mask, const Camera* cam,
             const FitConfig& cfg, const PointCloud* init = nullptr);

// Replaces each point with a 2x2 grid of children in its tangent plane:
// offsets (+-side/4, +-side/4) along a frame built from the point normal, or
// along the x/y axes when no normals are given. Children average back to the
// parent.
PointCloud fold_upsample(const PointCloud& cloud, const std::vector<Eigen::Vector3d>* normals,
                         double side = 0.1);

}  // namespace pcrk
