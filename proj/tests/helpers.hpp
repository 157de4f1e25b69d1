#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pcrk/rng.hpp"
#include "pcrk/types.hpp"

namespace testutil {

inline pcrk::PointCloud random_cloud(std::size_t n, pcrk::SeededRng& rng, double lo = -1.0,
                                     double hi = 1.0) {
  pcrk::PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    cloud.points.emplace_back(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi));
  return cloud;
}

// Uniform samples on the surface of the centered cube with side 1.
inline pcrk::PointCloud cube_surface_cloud(std::size_t n, pcrk::SeededRng& rng) {
  pcrk::PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t face = rng.below(6);
    const double u = rng.uniform(-0.5, 0.5);
    const double v = rng.uniform(-0.5, 0.5);
    const double s = face % 2 == 0 ? -0.5 : 0.5;
    switch (face / 2) {
      case 0: cloud.points.emplace_back(s, u, v); break;
      case 1: cloud.points.emplace_back(u, s, v); break;
      default: cloud.points.emplace_back(u, v, s); break;
    }
  }
  return cloud;
}

inline pcrk::PointCloud sphere_cloud(std::size_t n, pcrk::SeededRng& rng, double radius = 1.0,
                                     double radial_sigma = 0.0) {
  pcrk::PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d dir;
    do {
      dir = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    } while (dir.norm() < 1e-12);
    dir.normalize();
    const double r = radius + (radial_sigma > 0.0 ? radial_sigma * rng.normal() : 0.0);
    cloud.points.push_back(r * dir);
  }
  return cloud;
}

// Unit-radius icosphere: icosahedron refined by edge-midpoint subdivision.
inline pcrk::TriangleMesh icosphere(int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  pcrk::TriangleMesh mesh;
  const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& v : raw) mesh.vertices.push_back(Eigen::Vector3d(v[0], v[1], v[2]).normalized());
  const int raw_faces[20][3] = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                {1, 5, 9},   {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                {3, 9, 4},   {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                {4, 9, 5},   {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (const auto& f : raw_faces) mesh.faces.push_back({f[0], f[1], f[2]});

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it == midpoint.end()) {
        const int id = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
        it = midpoint.emplace(key, id).first;
      }
      return it->second;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * mesh.faces.size());
    for (const auto& f : mesh.faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(next);
  }
  return mesh;
}

inline pcrk::BinaryMask disk_mask(int width, int height, double cx, double cy, double radius) {
  pcrk::BinaryMask mask = pcrk::BinaryMask::zeros(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const double dx = c + 0.5 - cx, dy = r + 0.5 - cy;
      if (dx * dx + dy * dy <= radius * radius) mask.set(r, c, true);
    }
  return mask;
}

// (distance, index) ascending by (squared distance, index): the same order as
// the spatial index, computed by exhaustive scan.
inline std::vector<std::pair<double, int>> brute_knn(const pcrk::PointCloud& cloud,
                                                     const Eigen::Vector3d& q, int k) {
  std::vector<std::pair<double, int>> all;
  all.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    all.emplace_back(pcrk::squared_distance(cloud.points[i], q), static_cast<int>(i));
  std::sort(all.begin(), all.end());
  all.resize(k);
  for (auto& entry : all) entry.first = std::sqrt(entry.first);
  return all;
}

inline double brute_directed_mean_sq(const pcrk::PointCloud& from, const pcrk::PointCloud& to) {
  double sum = 0.0;
  for (const auto& p : from.points) {
    double best = pcrk::squared_distance(p, to.points[0]);
    for (const auto& q : to.points) best = std::min(best, pcrk::squared_distance(p, q));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

inline double brute_chamfer(const pcrk::PointCloud& a, const pcrk::PointCloud& b) {
  return brute_directed_mean_sq(a, b) + brute_directed_mean_sq(b, a);
}

inline double brute_chamfer_linear(const pcrk::PointCloud& a, const pcrk::PointCloud& b) {
  auto directed = [](const pcrk::PointCloud& from, const pcrk::PointCloud& to) {
    double sum = 0.0;
    for (const auto& p : from.points) {
      double best = pcrk::squared_distance(p, to.points[0]);
      for (const auto& q : to.points) best = std::min(best, pcrk::squared_distance(p, q));
      sum += std::sqrt(best);
    }
    return sum / static_cast<double>(from.size());
  };
  return directed(a, b) + directed(b, a);
}

// Exhaustive minimum over all bijections; n <= 8.
inline double brute_emd(const pcrk::PointCloud& a, const pcrk::PointCloud& b) {
  const std::size_t n = a.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += (a.points[i] - b.points[perm[i]]).norm();
    best = std::min(best, sum / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline double cloud_diameter(const pcrk::PointCloud& a, const pcrk::PointCloud& b) {
  std::vector<Eigen::Vector3d> all(a.points);
  all.insert(all.end(), b.points.begin(), b.points.end());
  double best = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      best = std::max(best, (all[i] - all[j]).norm());
  return best;
}

inline double min_pairwise_distance(const pcrk::PointCloud& cloud) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t j = i + 1; j < cloud.size(); ++j)
      best = std::min(best, (cloud.points[i] - cloud.points[j]).norm());
  return best;
}

// Coefficient of variation of each point's nearest-neighbor distance.
inline double nn_distance_cv(const pcrk::PointCloud& cloud) {
  const std::size_t n = cloud.size();
  std::vector<double> dists(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) best = std::min(best, (cloud.points[i] - cloud.points[j]).norm());
    dists[i] = best;
  }
  const double mean = std::accumulate(dists.begin(), dists.end(), 0.0) / n;
  double var = 0.0;
  for (double d : dists) var += (d - mean) * (d - mean);
  return std::sqrt(var / n) / mean;
}

}  // namespace testutil
