#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pcrk/rng.hpp"
#include "pcrk/types.hpp"

namespace pcrk {

enum class IcpMode { Full, TranslationOnly };

struct IcpResult {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  double residual = 0.0;  // mean Euclidean distance to matched targets
  int iterations = 0;
  std::vector<double> residual_history;  // one entry per iteration run
};

// Iterative closest point: alternates nearest-neighbor correspondences with
// a closed-form update (SVD rigid alignment for Full, matched-centroid shift
// for TranslationOnly) until the mean-residual improvement drops below tol
// or max_iters is reached. Returns the transform mapping source toward
// target. Full mode needs >= 3 points per cloud and throws
// std::runtime_error when the correspondence covariance has rank < 2.
IcpResult icp(const PointCloud& source, const PointCloud& target, IcpMode mode,
              int max_iters = 100, double tol = 1e-9);

// Evaluation protocol. ViewerCentered compares sampled clouds as-is;
// ObjectCentered normalizes both to unit scale and aligns with full rigid
// ICP; Pix3D applies pre_rotation to the ground truth, normalizes both, and
// aligns with translation-only ICP.
struct Protocol {
  enum class Kind { ViewerCentered, ObjectCentered, Pix3D };

  Kind kind = Kind::ViewerCentered;
  std::size_t n = 2466;  // points sampled from each cloud
  Eigen::Matrix3d pre_rotation = Eigen::Matrix3d::Identity();
  bool chamfer_linear = false;  // mean linear instead of mean squared distances

  static Protocol viewer_centered(std::size_t n = 2466);
  static Protocol object_centered(std::size_t n = 1024);
  static Protocol pix3d(const Eigen::Matrix3d& pre_rotation, std::size_t n = 1024);
};

struct EvalRecord {
  std::size_t sample_id = 0;
  double cd = 0.0;
  double emd = 0.0;
  Protocol protocol;
};

// Samples both clouds to proto.n with the same derived seed (so identical
// inputs give exactly zero), applies the protocol's alignment, and reports
// chamfer and approximate earth mover's distances.
EvalRecord evaluate(const PointCloud& pred, const PointCloud& gt, const Protocol& proto,
                    SeededRng& rng);

struct BatchFailure {
  std::size_t sample_id = 0;
  std::string message;
};

struct BatchResult {
  std::vector<EvalRecord> records;    // successful samples, in input order
  std::vector<BatchFailure> failures; // failed samples, excluded from means
  double mean_cd = 0.0;
  double mean_emd = 0.0;
};

// Evaluates each (pred, gt) pair with a per-sample seed derived from rng
// (base + index). Failures are recorded and excluded from the means; means
// are NaN when every sample fails.
BatchResult evaluate_batch(const std::vector<std::pair<PointCloud, PointCloud>>& pairs,
                           const Protocol& proto, SeededRng& rng);

}  // namespace pcrk
