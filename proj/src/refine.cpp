#include "pcrk/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "pcrk/nn_index.hpp"
#include "mc_tables.hpp"

namespace pcrk {

namespace {

std::uint64_t edge_key(std::uint64_t a, std::uint64_t b, std::uint64_t stride) {
  return a < b ? a * stride + b : b * stride + a;
}

double wendland(double q) {
  const double t = 1.0 - q;
  const double t2 = t * t;
  return t2 * t2 * (4.0 * q + 1.0);
}

// Far from every sample the field is a blend of extrapolated weight tails;
// with noisy normals its spurious zero crossings form sheets well off the
// data. Keep a vertex only when some sample covers it at less than this
// fraction of its support radius.
constexpr double kVertexKeepFraction = 0.75;

struct UnionFind {
  std::vector<int> parent, size;
  explicit UnionFind(int n) : parent(n), size(n, 1) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

}  // namespace

std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k) {
  if (k < 2) throw std::invalid_argument("estimate_normals: k must be at least 2");
  if (cloud.size() < static_cast<std::size_t>(k) + 1)
    throw std::invalid_argument("estimate_normals: cloud must have at least k + 1 points");

  const int n = static_cast<int>(cloud.size());
  const NnIndex index(cloud);
  std::vector<Eigen::Vector3d> normals(n);
  std::vector<std::vector<int>> adj(n);

  for (int i = 0; i < n; ++i) {
    const auto nbrs = index.knn(cloud.points[i], k + 1);

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& nb : nbrs) mean += cloud.points[nb.index];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& nb : nbrs) {
      const Eigen::Vector3d d = cloud.points[nb.index] - mean;
      cov += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d ev = eig.eigenvalues();
    if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2])
      throw std::runtime_error("estimate_normals: plane underdetermined at point " +
                               std::to_string(i) + " (degenerate neighborhood)");
    normals[i] = eig.eigenvectors().col(0).normalized();

    for (const auto& nb : nbrs) {
      if (nb.index == i) continue;
      adj[i].push_back(nb.index);
      adj[nb.index].push_back(i);
    }
  }

  // Consistent orientation: minimum spanning tree over the neighbor graph
  // weighted by 1 - |n_a . n_b|, seeds oriented away from the centroid.
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(n);

  std::vector<int> seed_order(n);
  for (int i = 0; i < n; ++i) seed_order[i] = i;
  std::sort(seed_order.begin(), seed_order.end(), [&](int a, int b) {
    const double da = (cloud.points[a] - centroid).squaredNorm();
    const double db = (cloud.points[b] - centroid).squaredNorm();
    return da > db || (da == db && a < b);
  });

  std::vector<char> visited(n, 0);
  using Edge = std::tuple<double, int, int>;  // weight, from, to
  std::priority_queue<Edge, std::vector<Edge>, std::greater<Edge>> pq;
  for (int seed : seed_order) {
    if (visited[seed]) continue;
    if (normals[seed].dot(cloud.points[seed] - centroid) < 0.0) normals[seed] = -normals[seed];
    visited[seed] = 1;
    for (int to : adj[seed]) pq.emplace(1.0 - std::abs(normals[seed].dot(normals[to])), seed, to);
    while (!pq.empty()) {
      const auto [w, from, to] = pq.top();
      pq.pop();
      (void)w;
      if (visited[to]) continue;
      visited[to] = 1;
      if (normals[from].dot(normals[to]) < 0.0) normals[to] = -normals[to];
      for (int next : adj[to])
        if (!visited[next]) pq.emplace(1.0 - std::abs(normals[to].dot(normals[next])), to, next);
    }
  }
  return normals;
}

std::vector<double> estimate_scales(const PointCloud& cloud) {
  if (cloud.size() < 3) throw std::invalid_argument("estimate_scales: need at least 3 points");
  const NnIndex index(cloud);
  std::vector<double> scales(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nbrs = index.knn(cloud.points[i], 3);
    double sum = 0.0;
    int taken = 0;
    for (const auto& nb : nbrs) {
      if (nb.index == static_cast<int>(i)) continue;
      sum += nb.distance;
      if (++taken == 2) break;
    }
    const double scale = sum / 2.0;
    if (!(scale > 0.0))
      throw std::runtime_error("estimate_scales: zero scale at point " + std::to_string(i) +
                               " (duplicate points)");
    scales[i] = scale;
  }
  return scales;
}

TriangleMesh reconstruct_surface(const OrientedCloud& oriented, int grid_resolution,
                                 double support_factor) {
  const PointCloud& cloud = oriented.cloud;
  const std::size_t n = cloud.size();
  if (n < 3)
    throw std::invalid_argument("reconstruct_surface: need at least 3 points for a surface");
  if (oriented.normals.size() != n || oriented.scales.size() != n)
    throw std::invalid_argument("reconstruct_surface: normals/scales size mismatch");
  if (grid_resolution < 2)
    throw std::invalid_argument("reconstruct_surface: grid_resolution must be at least 2");
  if (!(support_factor > 0.0))
    throw std::invalid_argument("reconstruct_surface: support_factor must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(oriented.normals[i].norm() - 1.0) > 1e-6)
      throw std::invalid_argument("reconstruct_surface: normal " + std::to_string(i) +
                                  " is not unit length");
    if (!(oriented.scales[i] > 0.0) || !std::isfinite(oriented.scales[i]))
      throw std::invalid_argument("reconstruct_surface: scale " + std::to_string(i) +
                                  " must be positive and finite");
  }

  std::vector<double> radius(n);
  double r_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    radius[i] = support_factor * oriented.scales[i];
    r_max = std::max(r_max, radius[i]);
  }

  Eigen::Vector3d lo = cloud.points[0], hi = cloud.points[0];
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo.array() -= r_max;
  hi.array() += r_max;

  const int res = grid_resolution;
  const int nodes_per_axis = res + 1;
  const Eigen::Vector3d h = (hi - lo) / static_cast<double>(res);
  const std::size_t node_count =
      static_cast<std::size_t>(nodes_per_axis) * nodes_per_axis * nodes_per_axis;
  std::vector<double> num(node_count, 0.0), den(node_count, 0.0);

  auto node_id = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * nodes_per_axis + j) * nodes_per_axis + k;
  };
  auto node_pos = [&](int i, int j, int k) {
    return Eigen::Vector3d(lo.x() + i * h.x(), lo.y() + j * h.y(), lo.z() + k * h.z());
  };

  // Scatter each point's weighted plane field onto the grid nodes inside its
  // support; point order is fixed, so the sums are deterministic.
  for (std::size_t pi = 0; pi < n; ++pi) {
    const Eigen::Vector3d& p = cloud.points[pi];
    const Eigen::Vector3d& nrm = oriented.normals[pi];
    const double r = radius[pi];
    int lo_idx[3], hi_idx[3];
    for (int a = 0; a < 3; ++a) {
      lo_idx[a] = std::max(0, static_cast<int>(std::ceil((p[a] - r - lo[a]) / h[a])));
      hi_idx[a] = std::min(res, static_cast<int>(std::floor((p[a] + r - lo[a]) / h[a])));
    }
    for (int i = lo_idx[0]; i <= hi_idx[0]; ++i)
      for (int j = lo_idx[1]; j <= hi_idx[1]; ++j)
        for (int k = lo_idx[2]; k <= hi_idx[2]; ++k) {
          const Eigen::Vector3d x = node_pos(i, j, k);
          const double d = (x - p).norm();
          if (d >= r) continue;
          const double w = wendland(d / r);
          const std::size_t id = node_id(i, j, k);
          num[id] += w * nrm.dot(x - p);
          den[id] += w;
        }
  }

  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, int> edge_vertex;
  const auto value_at = [&](std::size_t id) { return num[id] / den[id]; };

  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      for (int k = 0; k < res; ++k) {
        const std::size_t corner_ids[8] = {
            node_id(i, j, k),         node_id(i + 1, j, k),
            node_id(i + 1, j + 1, k), node_id(i, j + 1, k),
            node_id(i, j, k + 1),     node_id(i + 1, j, k + 1),
            node_id(i + 1, j + 1, k + 1), node_id(i, j + 1, k + 1)};
        const Eigen::Vector3d corner_pos[8] = {
            node_pos(i, j, k),         node_pos(i + 1, j, k),
            node_pos(i + 1, j + 1, k), node_pos(i, j + 1, k),
            node_pos(i, j, k + 1),     node_pos(i + 1, j, k + 1),
            node_pos(i + 1, j + 1, k + 1), node_pos(i, j + 1, k + 1)};

        bool covered = true;
        for (int c = 0; c < 8; ++c)
          if (den[corner_ids[c]] <= 0.0) {
            covered = false;
            break;
          }
        if (!covered) continue;

        int cube = 0;
        for (int c = 0; c < 8; ++c)
          if (value_at(corner_ids[c]) < 0.0) cube |= 1 << c;
        const int edges = detail::kEdgeTable[cube];
        if (edges == 0) continue;

        int vert_on_edge[12];
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          const int ca = detail::kEdgeCorners[e][0];
          const int cb = detail::kEdgeCorners[e][1];
          const std::uint64_t key = edge_key(corner_ids[ca], corner_ids[cb], node_count);
          auto it = edge_vertex.find(key);
          if (it == edge_vertex.end()) {
            const double va = value_at(corner_ids[ca]);
            const double vb = value_at(corner_ids[cb]);
            const double t = va / (va - vb);
            const Eigen::Vector3d pos = corner_pos[ca] + t * (corner_pos[cb] - corner_pos[ca]);
            it = edge_vertex.emplace(key, static_cast<int>(mesh.vertices.size())).first;
            mesh.vertices.push_back(pos);
          }
          vert_on_edge[e] = it->second;
        }

        const int* tri = detail::kTriTable[cube];
        for (int m = 0; tri[m] != -1; m += 3) {
          const int a = vert_on_edge[tri[m]];
          const int b = vert_on_edge[tri[m + 1]];
          const int c = vert_on_edge[tri[m + 2]];
          if (a == b || b == c || a == c) continue;  // collapsed by welding
          mesh.faces.push_back({a, b, c});
        }
      }
    }
  }

  if (mesh.faces.empty())
    throw std::runtime_error("reconstruct_surface: no surface found");

  // Drop interpolated vertices that no support covers closely.
  std::vector<char> outside(mesh.vertices.size(), 1);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Eigen::Vector3d& x = mesh.vertices[v];
    for (std::size_t pi = 0; pi < n; ++pi) {
      if ((x - cloud.points[pi]).norm() < kVertexKeepFraction * radius[pi]) {
        outside[v] = 0;
        break;
      }
    }
  }

  std::vector<int> remap(mesh.vertices.size(), -1);
  TriangleMesh filtered;
  for (const auto& f : mesh.faces) {
    if (outside[f[0]] || outside[f[1]] || outside[f[2]]) continue;
    std::array<int, 3> nf;
    for (int c = 0; c < 3; ++c) {
      if (remap[f[c]] < 0) {
        remap[f[c]] = static_cast<int>(filtered.vertices.size());
        filtered.vertices.push_back(mesh.vertices[f[c]]);
      }
      nf[c] = remap[f[c]];
    }
    filtered.faces.push_back(nf);
  }
  if (filtered.faces.empty())
    throw std::runtime_error("reconstruct_surface: no surface found");
  return filtered;
}

TriangleMesh clean_mesh(const TriangleMesh& mesh, int min_component_faces) {
  validate_mesh(mesh);
  if (min_component_faces < 1)
    throw std::invalid_argument("clean_mesh: min_component_faces must be positive");

  const int nf = static_cast<int>(mesh.faces.size());
  UnionFind uf(nf);
  std::unordered_map<std::uint64_t, int> first_face;
  first_face.reserve(3 * mesh.faces.size());
  const std::uint64_t stride = mesh.vertices.size();
  for (int f = 0; f < nf; ++f) {
    const auto& face = mesh.faces[f];
    for (int e = 0; e < 3; ++e) {
      const std::uint64_t key = edge_key(face[e], face[(e + 1) % 3], stride);
      const auto [it, inserted] = first_face.emplace(key, f);
      if (!inserted) uf.unite(it->second, f);
    }
  }

  std::vector<int> component_faces(nf, 0);
  for (int f = 0; f < nf; ++f) ++component_faces[uf.find(f)];

  TriangleMesh out;
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (int f = 0; f < nf; ++f) {
    if (component_faces[uf.find(f)] < min_component_faces) continue;
    std::array<int, 3> nf_face;
    for (int c = 0; c < 3; ++c) {
      const int v = mesh.faces[f][c];
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(mesh.vertices[v]);
      }
      nf_face[c] = remap[v];
    }
    out.faces.push_back(nf_face);
  }
  if (out.faces.empty())
    throw std::runtime_error("clean_mesh: no component with at least " +
                             std::to_string(min_component_faces) + " faces");
  return out;
}

TriangleMesh smooth_curvature_flow(const TriangleMesh& mesh, int iters, double step) {
  validate_mesh(mesh);
  if (iters < 0) throw std::invalid_argument("smooth_curvature_flow: iters must be >= 0");
  if (step < 0.0) throw std::invalid_argument("smooth_curvature_flow: step must be >= 0");

  const int nv = static_cast<int>(mesh.vertices.size());
  const std::uint64_t stride = mesh.vertices.size();

  // Manifoldness and boundary detection only depend on connectivity.
  std::unordered_map<std::uint64_t, int> edge_faces;
  edge_faces.reserve(3 * mesh.faces.size());
  for (const auto& face : mesh.faces)
    for (int e = 0; e < 3; ++e) ++edge_faces[edge_key(face[e], face[(e + 1) % 3], stride)];
  std::vector<char> pinned(nv, 0);
  for (const auto& [key, count] : edge_faces) {
    if (count > 2)
      throw std::invalid_argument("smooth_curvature_flow: edge on more than two faces");
    if (count == 1) {
      pinned[static_cast<int>(key / stride)] = 1;
      pinned[static_cast<int>(key % stride)] = 1;
    }
  }

  TriangleMesh out = mesh;
  if (iters == 0 || step == 0.0) return out;

  for (int it = 0; it < iters; ++it) {
    std::unordered_map<std::uint64_t, double> cot;
    cot.reserve(edge_faces.size());
    for (std::size_t f = 0; f < out.faces.size(); ++f) {
      const auto& face = out.faces[f];
      for (int c = 0; c < 3; ++c) {
        const int apex = face[c];
        const int a = face[(c + 1) % 3];
        const int b = face[(c + 2) % 3];
        const Eigen::Vector3d u = out.vertices[a] - out.vertices[apex];
        const Eigen::Vector3d v = out.vertices[b] - out.vertices[apex];
        const double cross = u.cross(v).norm();
        if (!(cross > 0.0) || !std::isfinite(cross))
          throw std::runtime_error("smooth_curvature_flow: face " + std::to_string(f) +
                                   " is degenerate");
        cot[edge_key(a, b, stride)] += u.dot(v) / cross;
      }
    }

    std::vector<std::vector<std::pair<int, double>>> nbr(nv);
    for (const auto& [key, w] : cot) {
      const int a = static_cast<int>(key / stride);
      const int b = static_cast<int>(key % stride);
      nbr[a].emplace_back(b, w);
      nbr[b].emplace_back(a, w);
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(7 * static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i) {
      double row_sum = 0.0;
      for (const auto& [j, w] : nbr[i]) row_sum += w;
      if (pinned[i] || nbr[i].empty() || !(row_sum > 0.0)) {
        triplets.emplace_back(i, i, 1.0);
        continue;
      }
      // Deterministic assembly order within the row.
      std::sort(nbr[i].begin(), nbr[i].end());
      triplets.emplace_back(i, i, 1.0 + step);
      for (const auto& [j, w] : nbr[i]) triplets.emplace_back(i, j, -step * w / row_sum);
    }

    Eigen::SparseMatrix<double> A(nv, nv);
    A.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("smooth_curvature_flow: backward-Euler solve failed");

    Eigen::MatrixXd rhs(nv, 3);
    for (int i = 0; i < nv; ++i) rhs.row(i) = out.vertices[i].transpose();
    const Eigen::MatrixXd next = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("smooth_curvature_flow: backward-Euler solve failed");
    for (int i = 0; i < nv; ++i) out.vertices[i] = next.row(i).transpose();
  }
  return out;
}

PoissonSample poisson_disc_resample(const TriangleMesh& mesh, std::size_t n, SeededRng& rng) {
  validate_mesh(mesh);
  if (n == 0) throw std::invalid_argument("poisson_disc_resample: n must be positive");
  if (mesh.faces.empty()) throw std::invalid_argument("poisson_disc_resample: mesh has no faces");

  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    const Eigen::Vector3d& a = mesh.vertices[face[0]];
    const Eigen::Vector3d& b = mesh.vertices[face[1]];
    const Eigen::Vector3d& c = mesh.vertices[face[2]];
    total += 0.5 * (b - a).cross(c - a).norm();
    cumulative[f] = total;
  }
  if (!(total > 0.0))
    throw std::invalid_argument("poisson_disc_resample: mesh has zero surface area");

  const std::size_t m = 4 * n;
  PointCloud candidates;
  candidates.points.reserve(m);
  for (std::size_t s = 0; s < m; ++s) {
    const double r = rng.uniform() * total;
    const std::size_t f =
        std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin();
    const auto& face = mesh.faces[std::min(f, mesh.faces.size() - 1)];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    candidates.points.push_back((1.0 - r1) * mesh.vertices[face[0]] +
                                r1 * (1.0 - r2) * mesh.vertices[face[1]] +
                                r1 * r2 * mesh.vertices[face[2]]);
  }

  const NnIndex index(candidates);
  std::vector<char> alive(m, 1);
  std::size_t alive_count = m;

  auto nearest_alive = [&](std::size_t c) -> std::pair<double, int> {
    int k = 8;
    while (true) {
      const int kk = std::min<std::size_t>(k, m);
      const auto nbrs = index.knn(candidates.points[c], kk);
      for (const auto& nb : nbrs)
        if (nb.index != static_cast<int>(c) && alive[nb.index]) return {nb.distance, nb.index};
      if (static_cast<std::size_t>(kk) == m) return {std::numeric_limits<double>::infinity(), -1};
      k *= 2;
    }
  };

  // Greedy sample elimination with a lazy min-heap keyed by the candidate's
  // distance to its nearest alive neighbor. Distances only grow as points are
  // removed, so a popped entry that is still current can be eliminated.
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (std::size_t c = 0; c < m; ++c) heap.emplace(nearest_alive(c).first, c);

  double elimination_radius = 0.0;
  while (alive_count > n) {
    const auto [d, c] = heap.top();
    heap.pop();
    if (!alive[c]) continue;
    const double current = nearest_alive(c).first;
    if (current > d) {
      heap.emplace(current, c);
      continue;
    }
    alive[c] = 0;
    --alive_count;
    elimination_radius = d;
  }

  PoissonSample out;
  out.points.points.reserve(n);
  for (std::size_t c = 0; c < m; ++c)
    if (alive[c]) out.points.points.push_back(candidates.points[c]);
  out.elimination_radius = elimination_radius;

  double min_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.points.size(); ++i)
    for (std::size_t j = i + 1; j < out.points.size(); ++j)
      min_sq = std::min(min_sq, squared_distance(out.points.points[i], out.points.points[j]));
  out.min_pairwise = out.points.size() < 2 ? 0.0 : std::sqrt(min_sq);
  return out;
}

RefineResult refine_pipeline(const PointCloud& cloud, const RefineConfig& cfg, SeededRng& rng) {
  auto staged = [](const char* stage, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("refine_pipeline[") + stage + "]: " + e.what());
    }
  };

  OrientedCloud oriented;
  oriented.cloud = cloud;
  oriented.normals =
      staged("estimate_normals", [&] { return estimate_normals(cloud, cfg.knn_for_normals); });
  oriented.scales = staged("estimate_scales", [&] { return estimate_scales(cloud); });

  RefineResult result;
  TriangleMesh surface = staged("reconstruct_surface", [&] {
    return reconstruct_surface(oriented, cfg.grid_resolution, cfg.support_factor);
  });
  result.surface =
      staged("clean_mesh", [&] { return clean_mesh(surface, cfg.min_component_faces); });
  result.smoothed = staged("smooth_curvature_flow", [&] {
    return smooth_curvature_flow(result.surface, cfg.smooth_iters, cfg.smooth_step);
  });
  result.points = staged("poisson_disc_resample", [&] {
                    return poisson_disc_resample(result.smoothed, cfg.resample_count, rng);
                  }).points;
  return result;
}

double mesh_area(const TriangleMesh& mesh) {
  double total = 0.0;
  for (const auto& face : mesh.faces) {
    const Eigen::Vector3d& a = mesh.vertices[face[0]];
    const Eigen::Vector3d& b = mesh.vertices[face[1]];
    const Eigen::Vector3d& c = mesh.vertices[face[2]];
    total += 0.5 * (b - a).cross(c - a).norm();
  }
  return total;
}

double mesh_volume(const TriangleMesh& mesh) {
  double six_v = 0.0;
  for (const auto& face : mesh.faces) {
    const Eigen::Vector3d& a = mesh.vertices[face[0]];
    const Eigen::Vector3d& b = mesh.vertices[face[1]];
    const Eigen::Vector3d& c = mesh.vertices[face[2]];
    six_v += a.dot(b.cross(c));
  }
  return std::abs(six_v) / 6.0;
}

}  // namespace pcrk
