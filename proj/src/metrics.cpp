#include "pcrk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pcrk/nn_index.hpp"
#include "pcrk/parallel.hpp"

namespace pcrk {

namespace {

void require_nonempty_pair(const PointCloud& a, const PointCloud& b, const char* who) {
  if (a.empty() || b.empty()) throw std::invalid_argument(std::string(who) + ": empty cloud");
}

// Mean of per-point nearest distances of `from` into `to`, squared or not.
// Distances are computed independently per point and reduced in index order,
// so the value does not depend on the thread schedule.
double directed_mean(const PointCloud& from, const NnIndex& to, bool squared) {
  std::vector<double> dist(from.size());
  parallel_for(from.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double d2 = to.nearest_sq(from.points[i]).second;
      dist[i] = squared ? d2 : std::sqrt(d2);
    }
  });
  double sum = 0.0;
  for (double d : dist) sum += d;
  return sum / static_cast<double>(from.size());
}

double chamfer_impl(const PointCloud& a, const PointCloud& b, bool squared) {
  require_nonempty_pair(a, b, "chamfer");
  const NnIndex index_a(a);
  const NnIndex index_b(b);
  return directed_mean(a, index_b, squared) + directed_mean(b, index_a, squared);
}

std::vector<double> cost_matrix(const PointCloud& a, const PointCloud& b) {
  const std::size_t n = a.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = (a.points[i] - b.points[j]).norm();
  return cost;
}

double union_diameter(const PointCloud& a, const PointCloud& b) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(a.size() + b.size());
  pts.insert(pts.end(), a.points.begin(), a.points.end());
  pts.insert(pts.end(), b.points.begin(), b.points.end());
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, squared_distance(pts[i], pts[j]));
  return std::sqrt(best);
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b) { return chamfer_impl(a, b, true); }

double chamfer_linear(const PointCloud& a, const PointCloud& b) {
  return chamfer_impl(a, b, false);
}

double emd_exact(const PointCloud& a, const PointCloud& b, std::size_t cap) {
  if (a.size() != b.size()) throw std::invalid_argument("emd_exact: clouds must have equal sizes");
  require_nonempty_pair(a, b, "emd_exact");
  if (a.size() > cap)
    throw std::invalid_argument("emd_exact: cloud size exceeds cap; use emd_approx");

  const int n = static_cast<int>(a.size());
  const auto cost = cost_matrix(a, b);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Shortest-augmenting-path assignment with dual potentials (Jonker-Volgenant
  // family, O(n^3)). p[j] holds the row matched to column j, 1-based with a
  // virtual column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * static_cast<std::size_t>(n) + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost[(p[j] - 1) * static_cast<std::size_t>(n) + (j - 1)];
  return total / static_cast<double>(n);
}

double emd_approx(const PointCloud& a, const PointCloud& b, double epsilon) {
  if (a.size() != b.size())
    throw std::invalid_argument("emd_approx: clouds must have equal sizes");
  require_nonempty_pair(a, b, "emd_approx");
  if (!(epsilon > 0.0)) throw std::invalid_argument("emd_approx: epsilon must be positive");

  const std::size_t n = a.size();
  const double diam = union_diameter(a, b);
  if (diam == 0.0) return 0.0;  // all points coincide

  const auto cost = cost_matrix(a, b);
  const double eps_final = epsilon * diam;
  double eps = std::max(diam / 4.0, eps_final);

  std::vector<double> price(n, 0.0);
  std::vector<int> assigned(n, -1), owner(n, -1);

  // Forward auction with epsilon scaling: each phase reassigns everyone under
  // the current bid increment; prices persist so later phases start warm. A
  // terminated phase satisfies epsilon-complementary slackness, which bounds
  // the total cost within n * eps of optimal.
  while (true) {
    std::fill(assigned.begin(), assigned.end(), -1);
    std::fill(owner.begin(), owner.end(), -1);
    std::vector<std::size_t> pending(n);
    for (std::size_t i = 0; i < n; ++i) pending[i] = i;

    while (!pending.empty()) {
      const std::size_t i = pending.back();
      pending.pop_back();

      double best_value = -std::numeric_limits<double>::infinity();
      double second_value = -std::numeric_limits<double>::infinity();
      std::size_t best_j = 0;
      const double* row = cost.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double value = -row[j] - price[j];
        if (value > best_value) {
          second_value = best_value;
          best_value = value;
          best_j = j;
        } else if (value > second_value) {
          second_value = value;
        }
      }
      if (!std::isfinite(second_value)) second_value = best_value;  // n == 1

      price[best_j] += best_value - second_value + eps;
      if (owner[best_j] >= 0) {
        assigned[owner[best_j]] = -1;
        pending.push_back(static_cast<std::size_t>(owner[best_j]));
      }
      owner[best_j] = static_cast<int>(i);
      assigned[i] = static_cast<int>(best_j);
    }

    if (eps <= eps_final) break;
    eps = std::max(eps / 4.0, eps_final);
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + assigned[i]];
  return total / static_cast<double>(n);
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("iou: mask shapes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    const bool va = a.bits[i] != 0, vb = b.bits[i] != 0;
    inter += va && vb;
    uni += va || vb;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

IouReport iou_report(const BinaryMask& pred_full, const BinaryMask& gt_full,
                     const BinaryMask& gt_visible) {
  if (!pred_full.same_shape(gt_full) || !gt_full.same_shape(gt_visible))
    throw std::invalid_argument("iou_report: mask shapes differ");
  for (std::size_t i = 0; i < gt_full.bits.size(); ++i)
    if (gt_visible.bits[i] && !gt_full.bits[i])
      throw std::invalid_argument("iou_report: gt_visible must be a subset of gt_full");

  IouReport report;
  report.full = iou(pred_full, gt_full);

  BinaryMask pred_vis = pred_full, gt_vis = gt_full;
  BinaryMask pred_occ = pred_full, gt_occ = gt_full;
  std::size_t occluded_region = 0;
  for (std::size_t i = 0; i < gt_full.bits.size(); ++i) {
    const bool vis = gt_visible.bits[i] != 0;
    const bool occ = gt_full.bits[i] != 0 && !vis;
    pred_vis.bits[i] = pred_full.bits[i] && vis;
    gt_vis.bits[i] = gt_full.bits[i] && vis;
    pred_occ.bits[i] = pred_full.bits[i] && occ;
    gt_occ.bits[i] = gt_full.bits[i] && occ;
    occluded_region += occ;
  }
  report.visible = iou(pred_vis, gt_vis);
  if (occluded_region > 0) report.occluded = iou(pred_occ, gt_occ);
  return report;
}

}  // namespace pcrk
