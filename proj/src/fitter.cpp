#include "pcrk/fitter.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "pcrk/cloud_ops.hpp"

namespace pcrk {

PointCloud init_points(std::size_t n, InitMode mode, SeededRng& rng, const PointCloud* source) {
  if (n == 0) throw std::invalid_argument("init_points: n must be positive");
  PointCloud cloud;
  switch (mode) {
    case InitMode::UnitSphere:
      cloud.points.reserve(n);
      while (cloud.points.size() < n) {
        const Eigen::Vector3d g(rng.normal(), rng.normal(), rng.normal());
        const double len = g.norm();
        if (len == 0.0) continue;
        cloud.points.push_back(g / len);
      }
      return cloud;
    case InitMode::UnitCube:
      cloud.points.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        cloud.points.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                  rng.uniform(-0.5, 0.5));
      return cloud;
    case InitMode::FromCloud:
      if (source == nullptr)
        throw std::invalid_argument("init_points: FromCloud requires a source cloud");
      return sample_fixed_n(*source, n, rng);
  }
  throw std::logic_error("init_points: unknown mode");
}

FitTrace fit(const PointCloud& target, const BinaryMask* mask, const Camera* cam,
             const FitConfig& cfg, const PointCloud* init) {
  if (target.empty()) throw std::invalid_argument("fit: empty target");
  if (cfg.max_iters == 0) throw std::invalid_argument("fit: max_iters must be positive");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("fit: lr must be positive");

  SeededRng rng(cfg.seed);
  PointCloud pred = init != nullptr ? *init : init_points(cfg.n_points, cfg.init, rng);
  if (pred.empty()) throw std::invalid_argument("fit: empty initial cloud");

  const std::size_t n = pred.size();
  std::vector<Eigen::Vector3d> m(n, Eigen::Vector3d::Zero());
  std::vector<Eigen::Vector3d> v(n, Eigen::Vector3d::Zero());

  FitTrace trace;
  trace.iterations.reserve(cfg.max_iters);
  PointCloud last_finite = pred;

  double beta1_t = 1.0, beta2_t = 1.0;
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    LossBreakdown step = loss_total(target, pred, mask, cam, cfg.views, cfg.weights, true);
    if (!std::isfinite(step.total)) {
      trace.final_cloud = last_finite;
      trace.final_total =
          trace.iterations.empty() ? step.total : trace.iterations.back().total;
      throw FitDivergence(std::move(trace));
    }
    last_finite = pred;

    beta1_t *= cfg.beta1;
    beta2_t *= cfg.beta2;
    const double corr1 = 1.0 - beta1_t;
    const double corr2 = 1.0 - beta2_t;
    for (std::size_t j = 0; j < n; ++j) {
      for (int k = 0; k < 3; ++k) {
        const double g = step.grad[j][k];
        m[j][k] = cfg.beta1 * m[j][k] + (1.0 - cfg.beta1) * g;
        v[j][k] = cfg.beta2 * v[j][k] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[j][k] / corr1;
        const double v_hat = v[j][k] / corr2;
        pred.points[j][k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
      }
    }

    step.grad.clear();
    step.grad.shrink_to_fit();
    trace.iterations.push_back(std::move(step));
  }

  const LossBreakdown final_step =
      loss_total(target, pred, mask, cam, cfg.views, cfg.weights, false);
  if (!std::isfinite(final_step.total)) {
    trace.final_cloud = last_finite;
    trace.final_total = trace.iterations.back().total;
    throw FitDivergence(std::move(trace));
  }
  trace.final_total = final_step.total;
  trace.final_cloud = std::move(pred);
  return trace;
}

PointCloud fold_upsample(const PointCloud& cloud, const std::vector<Eigen::Vector3d>* normals,
                         double side) {
  if (cloud.empty()) throw std::invalid_argument("fold_upsample: empty cloud");
  if (!(side > 0.0)) throw std::invalid_argument("fold_upsample: side must be positive");
  if (normals != nullptr && normals->size() != cloud.size())
    throw std::invalid_argument("fold_upsample: normals count must match cloud size");

  const double h = side / 4.0;
  PointCloud out;
  out.points.reserve(4 * cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Eigen::Vector3d t1, t2;
    if (normals == nullptr) {
      t1 = Eigen::Vector3d::UnitX();
      t2 = Eigen::Vector3d::UnitY();
    } else {
      const Eigen::Vector3d& nrm = (*normals)[i];
      if (std::abs(nrm.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("fold_upsample: normal " + std::to_string(i) +
                                    " is not unit length");
      // Tangent frame seeded from the coordinate axis least aligned with the
      // normal (lowest axis index on ties).
      int axis = 0;
      double best = std::abs(nrm.x());
      if (std::abs(nrm.y()) < best) {
        best = std::abs(nrm.y());
        axis = 1;
      }
      if (std::abs(nrm.z()) < best) axis = 2;
      const Eigen::Vector3d e = Eigen::Vector3d::Unit(axis);
      t1 = (e - e.dot(nrm) * nrm).normalized();
      t2 = nrm.cross(t1);
    }
    const Eigen::Vector3d& p = cloud.points[i];
    out.points.push_back(p - h * t1 - h * t2);
    out.points.push_back(p - h * t1 + h * t2);
    out.points.push_back(p + h * t1 - h * t2);
    out.points.push_back(p + h * t1 + h * t2);
  }
  return out;
}

}  // namespace pcrk
