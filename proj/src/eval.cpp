#include "pcrk/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "pcrk/cloud_ops.hpp"
#include "pcrk/metrics.hpp"
#include "pcrk/nn_index.hpp"

namespace pcrk {

namespace {

constexpr double kEvalEmdEpsilon = 1e-3;

void require_rotation(const Eigen::Matrix3d& R, const char* what) {
  if ((R.transpose() * R - Eigen::Matrix3d::Identity()).norm() > 1e-9 || R.determinant() <= 0.0)
    throw std::invalid_argument(std::string(what) + ": matrix is not a rotation");
}

PointCloud apply_transform(const PointCloud& cloud, const Eigen::Matrix3d& R,
                           const Eigen::Vector3d& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(R * p + t);
  return out;
}

}  // namespace

IcpResult icp(const PointCloud& source, const PointCloud& target, IcpMode mode, int max_iters,
              double tol) {
  const std::size_t min_points = mode == IcpMode::Full ? 3 : 1;
  if (source.size() < min_points || target.size() < min_points)
    throw std::invalid_argument("icp: too few points for the requested mode");
  if (max_iters < 1) throw std::invalid_argument("icp: max_iters must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("icp: tol must be >= 0");
  if (!all_finite(source)) throw std::invalid_argument("icp: source has non-finite points");

  const NnIndex index(target);

  Eigen::Vector3d src_centroid = Eigen::Vector3d::Zero();
  for (const auto& p : source.points) src_centroid += p;
  src_centroid /= static_cast<double>(source.size());

  IcpResult result;
  double prev_residual = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iters; ++iter) {
    std::vector<int> match(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
      const Eigen::Vector3d q = result.R * source.points[i] + result.t;
      match[i] = index.nearest_sq(q).first;
    }

    Eigen::Vector3d dst_centroid = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) dst_centroid += target.points[match[i]];
    dst_centroid /= static_cast<double>(source.size());

    if (mode == IcpMode::TranslationOnly) {
      result.t = dst_centroid - src_centroid;
    } else {
      Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
      for (std::size_t i = 0; i < source.size(); ++i)
        H += (source.points[i] - src_centroid) *
             (target.points[match[i]] - dst_centroid).transpose();
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::Vector3d sing = svd.singularValues();
      if (!(sing[0] > 0.0) || sing[1] <= 1e-12 * sing[0])
        throw std::runtime_error("icp: degenerate correspondence covariance (rank < 2)");
      const Eigen::Matrix3d U = svd.matrixU();
      const Eigen::Matrix3d V = svd.matrixV();
      Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
      if ((V * U.transpose()).determinant() < 0.0) D(2, 2) = -1.0;
      result.R = V * D * U.transpose();
      result.t = dst_centroid - result.R * src_centroid;
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < source.size(); ++i) {
      const Eigen::Vector3d q = result.R * source.points[i] + result.t;
      sum += (q - target.points[match[i]]).norm();
    }
    result.residual = sum / static_cast<double>(source.size());
    result.iterations = iter + 1;
    result.residual_history.push_back(result.residual);
    if (prev_residual - result.residual < tol) break;
    prev_residual = result.residual;
  }
  return result;
}

Protocol Protocol::viewer_centered(std::size_t n) {
  Protocol p;
  p.kind = Kind::ViewerCentered;
  p.n = n;
  return p;
}

Protocol Protocol::object_centered(std::size_t n) {
  Protocol p;
  p.kind = Kind::ObjectCentered;
  p.n = n;
  return p;
}

Protocol Protocol::pix3d(const Eigen::Matrix3d& pre_rotation, std::size_t n) {
  Protocol p;
  p.kind = Kind::Pix3D;
  p.n = n;
  p.pre_rotation = pre_rotation;
  return p;
}

EvalRecord evaluate(const PointCloud& pred, const PointCloud& gt, const Protocol& proto,
                    SeededRng& rng) {
  if (pred.empty() || gt.empty()) throw std::invalid_argument("evaluate: empty cloud");
  if (proto.n == 0) throw std::invalid_argument("evaluate: protocol sample count must be >= 1");
  if (proto.kind == Protocol::Kind::Pix3D) require_rotation(proto.pre_rotation, "evaluate");

  // One seed for both clouds: identical inputs then yield identical samples.
  const std::uint64_t sample_seed = rng.next_u64();
  SeededRng pred_rng(sample_seed), gt_rng(sample_seed);
  PointCloud p = sample_fixed_n(pred, proto.n, pred_rng);
  PointCloud g = sample_fixed_n(gt, proto.n, gt_rng);

  switch (proto.kind) {
    case Protocol::Kind::ViewerCentered:
      break;
    case Protocol::Kind::ObjectCentered: {
      p = normalize_unit(p).cloud;
      g = normalize_unit(g).cloud;
      const IcpResult aligned = icp(p, g, IcpMode::Full);
      p = apply_transform(p, aligned.R, aligned.t);
      break;
    }
    case Protocol::Kind::Pix3D: {
      for (auto& point : g.points) point = proto.pre_rotation * point;
      p = normalize_unit(p).cloud;
      g = normalize_unit(g).cloud;
      const IcpResult aligned = icp(p, g, IcpMode::TranslationOnly);
      p = apply_transform(p, aligned.R, aligned.t);
      break;
    }
  }

  EvalRecord record;
  record.cd = proto.chamfer_linear ? chamfer_linear(p, g) : chamfer(p, g);
  record.emd = emd_approx(p, g, kEvalEmdEpsilon);
  record.protocol = proto;
  return record;
}

BatchResult evaluate_batch(const std::vector<std::pair<PointCloud, PointCloud>>& pairs,
                           const Protocol& proto, SeededRng& rng) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_batch: empty pair list");

  const std::uint64_t base = rng.next_u64();
  BatchResult result;
  double sum_cd = 0.0, sum_emd = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    SeededRng sample_rng(base + i);
    try {
      EvalRecord record = evaluate(pairs[i].first, pairs[i].second, proto, sample_rng);
      record.sample_id = i;
      sum_cd += record.cd;
      sum_emd += record.emd;
      result.records.push_back(std::move(record));
    } catch (const std::exception& e) {
      result.failures.push_back({i, e.what()});
    }
  }
  if (result.records.empty()) {
    result.mean_cd = std::numeric_limits<double>::quiet_NaN();
    result.mean_emd = std::numeric_limits<double>::quiet_NaN();
  } else {
    result.mean_cd = sum_cd / static_cast<double>(result.records.size());
    result.mean_emd = sum_emd / static_cast<double>(result.records.size());
  }
  return result;
}

}  // namespace pcrk
