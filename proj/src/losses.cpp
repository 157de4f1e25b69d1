#include "pcrk/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pcrk/nn_index.hpp"
#include "pcrk/parallel.hpp"

namespace pcrk {

namespace {

PointCloud embed_2d(const Point2Set& pts) {
  PointCloud cloud;
  cloud.points.reserve(pts.size());
  for (const auto& p : pts) cloud.points.emplace_back(p.x(), p.y(), 0.0);
  return cloud;
}

// Rows of the 2x3 Jacobian of the view projection at p.
void projection_jacobian(const Eigen::Vector3d& p, const ViewSpec& view, Eigen::Vector3d& du,
                         Eigen::Vector3d& dv) {
  switch (view.kind) {
    case ViewKind::OrthoXY:
      du = {1, 0, 0};
      dv = {0, 1, 0};
      return;
    case ViewKind::OrthoYZ:
      du = {0, 1, 0};
      dv = {0, 0, 1};
      return;
    case ViewKind::OrthoXZ:
      du = {1, 0, 0};
      dv = {0, 0, 1};
      return;
    case ViewKind::Perspective: {
      const Camera& cam = view.camera;
      const Eigen::Vector3d q = cam.R * p + cam.t;
      const double inv_z = 1.0 / q.z();
      du = cam.fx * inv_z * cam.R.row(0).transpose() -
           cam.fx * q.x() * inv_z * inv_z * cam.R.row(2).transpose();
      dv = cam.fy * inv_z * cam.R.row(1).transpose() -
           cam.fy * q.y() * inv_z * inv_z * cam.R.row(2).transpose();
      return;
    }
  }
  throw std::logic_error("projection_jacobian: unknown view kind");
}

// Mean over `targets` of the squared distance to the nearest of `proj`
// (pre-projected prediction), scattering the chain-ruled gradient onto the 3D
// prediction when requested.
double directed_2d_term(const Point2Set& targets, const Point2Set& proj, const PointCloud& pred,
                        const ViewSpec& view, bool with_grad,
                        std::vector<Eigen::Vector3d>* grad) {
  const NnIndex index(embed_2d(proj));
  const std::size_t n = targets.size();
  std::vector<double> dist(n);
  std::vector<int> match(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [idx, d2] = index.nearest_sq({targets[i].x(), targets[i].y(), 0.0});
      dist[i] = d2;
      match[i] = idx;
    }
  });

  double sum = 0.0;
  for (double d : dist) sum += d;
  const double mean = sum / static_cast<double>(n);

  if (with_grad) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int j = match[i];
      const Eigen::Vector2d residual = proj[j] - targets[i];
      Eigen::Vector3d du, dv;
      projection_jacobian(pred.points[j], view, du, dv);
      (*grad)[j] += 2.0 * inv_n * (residual.x() * du + residual.y() * dv);
    }
  }
  return mean;
}

}  // namespace

LossResult loss_rec(const PointCloud& gt, const PointCloud& pred, bool with_grad) {
  if (gt.empty() || pred.empty()) throw std::invalid_argument("loss_rec: empty cloud");

  const NnIndex pred_index(pred);
  const NnIndex gt_index(gt);
  const std::size_t n_gt = gt.size(), n_pred = pred.size();

  // Accumulation mirrors chamfer(): per-point squared distances reduced in
  // index order, one mean per direction.
  std::vector<double> d_gt(n_gt), d_pred(n_pred);
  std::vector<int> match_gt(n_gt), match_pred(n_pred);
  parallel_for(n_gt, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [idx, d2] = pred_index.nearest_sq(gt.points[i]);
      d_gt[i] = d2;
      match_gt[i] = idx;
    }
  });
  parallel_for(n_pred, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const auto [idx, d2] = gt_index.nearest_sq(pred.points[j]);
      d_pred[j] = d2;
      match_pred[j] = idx;
    }
  });

  double sum_gt = 0.0, sum_pred = 0.0;
  for (double d : d_gt) sum_gt += d;
  for (double d : d_pred) sum_pred += d;

  LossResult out;
  out.value = sum_gt / static_cast<double>(n_gt) + sum_pred / static_cast<double>(n_pred);
  if (with_grad) {
    out.grad.assign(n_pred, Eigen::Vector3d::Zero());
    const double inv_gt = 1.0 / static_cast<double>(n_gt);
    const double inv_pred = 1.0 / static_cast<double>(n_pred);
    for (std::size_t j = 0; j < n_pred; ++j)
      out.grad[j] = 2.0 * inv_pred * (pred.points[j] - gt.points[match_pred[j]]);
    for (std::size_t i = 0; i < n_gt; ++i)
      out.grad[match_gt[i]] += 2.0 * inv_gt * (pred.points[match_gt[i]] - gt.points[i]);
  }
  return out;
}

LossResult loss_proj(const PointCloud& gt, const PointCloud& pred,
                     const std::vector<ViewSpec>& views, bool with_grad) {
  if (gt.empty() || pred.empty()) throw std::invalid_argument("loss_proj: empty cloud");

  LossResult out;
  if (with_grad) out.grad.assign(pred.size(), Eigen::Vector3d::Zero());
  for (const auto& view : views) {
    const Point2Set gt2 = project(gt, view);
    const Point2Set pred2 = project(pred, view);
    out.value += directed_2d_term(gt2, pred2, pred, view, with_grad, &out.grad);
  }
  return out;
}

LossResult loss_silhouette(const BinaryMask& mask, const PointCloud& pred, const Camera& cam,
                           bool with_grad) {
  if (pred.empty()) throw std::invalid_argument("loss_silhouette: empty prediction");
  const Point2Set targets = mask_to_points(mask);
  if (targets.empty()) throw std::invalid_argument("loss_silhouette: mask has no foreground");

  const ViewSpec view = ViewSpec::perspective(cam);
  const Point2Set pred2 = project(pred, view);
  LossResult out;
  if (with_grad) out.grad.assign(pred.size(), Eigen::Vector3d::Zero());
  out.value = directed_2d_term(targets, pred2, pred, view, with_grad, &out.grad);
  return out;
}

double combine_components(const LossWeights& w, double rec, double silhouette, double proj) {
  return w.rec * rec + w.silhouette * silhouette + w.proj * proj;
}

LossBreakdown loss_total(const PointCloud& gt, const PointCloud& pred, const BinaryMask* mask,
                         const Camera* cam, const std::vector<ViewSpec>& views,
                         const LossWeights& w, bool with_grad) {
  LossBreakdown out;
  const LossResult rec = loss_rec(gt, pred, with_grad);
  const LossResult proj = loss_proj(gt, pred, views, with_grad);
  out.rec = rec.value;
  out.proj = proj.value;

  LossResult sil;
  const bool have_silhouette = mask != nullptr && cam != nullptr;
  if (have_silhouette) {
    sil = loss_silhouette(*mask, pred, *cam, with_grad);
    out.silhouette = sil.value;
  }

  out.total = combine_components(w, out.rec, out.silhouette, out.proj);
  if (with_grad) {
    out.grad.assign(pred.size(), Eigen::Vector3d::Zero());
    for (std::size_t j = 0; j < pred.size(); ++j) {
      out.grad[j] = w.rec * rec.grad[j] + w.proj * proj.grad[j];
      if (have_silhouette) out.grad[j] += w.silhouette * sil.grad[j];
    }
  }
  return out;
}

std::vector<ViewSpec> default_proj_views() {
  return {ViewSpec::ortho_xy(), ViewSpec::ortho_xz()};
}

}  // namespace pcrk
