#pragma once

#include <cstdint>
#include <vector>

#include "pcrk/rng.hpp"
#include "pcrk/types.hpp"

namespace pcrk {

struct OrientedCloud {
  PointCloud cloud;
  std::vector<Eigen::Vector3d> normals;  // unit length
  std::vector<double> scales;            // positive
};

struct RefineConfig {
  int knn_for_normals = 6;
  int smooth_iters = 5;
  double smooth_step = 0.1;
  int grid_resolution = 64;       // cells per axis
  double support_factor = 3.0;    // support radius = factor * per-point scale
  int min_component_faces = 20;
  std::size_t resample_count = 1024;
};

// Per-point unit normals from a plane fit to the k nearest neighbors (the
// point itself included), oriented consistently by propagating along a
// minimum spanning tree of the neighbor graph; each component's seed points
// away from the cloud centroid. Requires cloud size >= k + 1.
std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k);

// Per-point mean Euclidean distance to the two nearest other points.
// Requires cloud size >= 3; throws on a zero scale (duplicate points).
std::vector<double> estimate_scales(const PointCloud& cloud);

// Zero isosurface of the blended signed field
//   F(x) = sum_i w_i(x) n_i . (x - p_i) / sum_i w_i(x),
// with compactly supported weights of radius support_factor * scale_i,
// sampled on a regular grid and polygonized by marching cubes. Grid nodes
// outside every support carry no field; cells touching them are skipped, so
// the output may be open. Vertices farther than three quarters of a support
// radius from every sample are dropped: out there the field is a blend of
// extrapolated tails whose spurious crossings form sheets off the data.
// Throws "no surface found" when nothing crosses zero.
TriangleMesh reconstruct_surface(const OrientedCloud& oriented, int grid_resolution,
                                 double support_factor);

// Drops connected components (faces joined by shared edges) with fewer than
// min_component_faces faces and compacts the vertex list. Throws when nothing
// survives.
TriangleMesh clean_mesh(const TriangleMesh& mesh, int min_component_faces);

// iters backward-Euler steps of curvature flow: per step, solve
// (I + step * L) V_next = V with the row-normalized cotangent Laplacian
// rebuilt from the current vertices. Boundary vertices (edges on one face)
// stay pinned. Requires every edge on at most two faces; throws on degenerate
// faces, naming the face.
TriangleMesh smooth_curvature_flow(const TriangleMesh& mesh, int iters, double step);

struct PoissonSample {
  PointCloud points;
  // Nearest-neighbor distance of the last eliminated candidate; the output's
  // true minimum pairwise distance is at least this.
  double elimination_radius = 0.0;
  // Exact minimum pairwise distance of the output.
  double min_pairwise = 0.0;
};

// Blue-noise surface sampling: draws 4n area-weighted candidates, then
// greedily eliminates the candidate with the smallest nearest-neighbor
// distance until n remain.
PoissonSample poisson_disc_resample(const TriangleMesh& mesh, std::size_t n, SeededRng& rng);

struct RefineResult {
  PointCloud points;
  TriangleMesh surface;   // reconstructed and cleaned
  TriangleMesh smoothed;  // after curvature flow
};

// normals -> scales -> surface -> clean -> smooth -> resample. A failing
// stage's error is rethrown tagged with the stage name.
RefineResult refine_pipeline(const PointCloud& cloud, const RefineConfig& cfg, SeededRng& rng);

double mesh_area(const TriangleMesh& mesh);
// Absolute enclosed volume (divergence-theorem sum); meaningful for closed
// meshes.
double mesh_volume(const TriangleMesh& mesh);

}  // namespace pcrk
