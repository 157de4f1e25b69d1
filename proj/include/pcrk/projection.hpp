#pragma once

#include <vector>

#include "pcrk/types.hpp"

namespace pcrk {

using Point2Set = std::vector<Eigen::Vector2d>;

enum class ViewKind { Perspective, OrthoXY, OrthoYZ, OrthoXZ };

// Either a pinhole projection through a camera or an axis-aligned coordinate
// drop: OrthoXY keeps (x, y), OrthoYZ keeps (y, z), OrthoXZ keeps (x, z).
struct ViewSpec {
  ViewKind kind = ViewKind::OrthoXY;
  Camera camera;  // used only for Perspective

  static ViewSpec perspective(const Camera& cam) { return {ViewKind::Perspective, cam}; }
  static ViewSpec ortho_xy() { return {ViewKind::OrthoXY, {}}; }
  static ViewSpec ortho_yz() { return {ViewKind::OrthoYZ, {}}; }
  static ViewSpec ortho_xz() { return {ViewKind::OrthoXZ, {}}; }
};

// Projects every point, preserving order. Perspective projection throws
// std::runtime_error if any point lands at or behind the camera plane.
Point2Set project(const PointCloud& cloud, const ViewSpec& view);

Eigen::Vector2d project_point(const Eigen::Vector3d& p, const ViewSpec& view);

// Foreground pixel centers as 2D points: pixel (row, col) maps to
// (col + 0.5, row + 0.5), emitted in row-major order.
Point2Set mask_to_points(const BinaryMask& mask);

}  // namespace pcrk
