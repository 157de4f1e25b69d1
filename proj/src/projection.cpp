#include "pcrk/projection.hpp"

#include <stdexcept>
#include <string>

namespace pcrk {

namespace {
constexpr double kMinDepth = 1e-12;
}

Eigen::Vector2d project_point(const Eigen::Vector3d& p, const ViewSpec& view) {
  switch (view.kind) {
    case ViewKind::OrthoXY:
      return {p.x(), p.y()};
    case ViewKind::OrthoYZ:
      return {p.y(), p.z()};
    case ViewKind::OrthoXZ:
      return {p.x(), p.z()};
    case ViewKind::Perspective: {
      const Eigen::Vector3d q = view.camera.R * p + view.camera.t;
      if (q.z() < kMinDepth)
        throw std::runtime_error("project: point at or behind the camera plane");
      return {view.camera.fx * q.x() / q.z() + view.camera.cx,
              view.camera.fy * q.y() / q.z() + view.camera.cy};
    }
  }
  throw std::logic_error("project: unknown view kind");
}

Point2Set project(const PointCloud& cloud, const ViewSpec& view) {
  if (view.kind == ViewKind::Perspective) view.camera.validate();
  Point2Set out;
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    try {
      out.push_back(project_point(cloud.points[i], view));
    } catch (const std::runtime_error&) {
      throw std::runtime_error("project: point " + std::to_string(i) +
                               " is at or behind the camera plane");
    }
  }
  return out;
}

Point2Set mask_to_points(const BinaryMask& mask) {
  Point2Set out;
  out.reserve(mask.count());
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c)
      if (mask.at(r, c)) out.emplace_back(c + 0.5, r + 0.5);
  return out;
}

}  // namespace pcrk
