#include "pcrk/types.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace pcrk {

BinaryMask BinaryMask::zeros(int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("mask dimensions must be positive");
  BinaryMask m;
  m.width = width;
  m.height = height;
  m.bits.assign(static_cast<std::size_t>(width) * height, 0);
  return m;
}

std::size_t BinaryMask::count() const {
  return std::accumulate(bits.begin(), bits.end(), std::size_t{0});
}

RgbImage RgbImage::filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
  RgbImage img;
  img.width = width;
  img.height = height;
  img.data.resize(3 * static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    img.data[i] = r;
    img.data[i + 1] = g;
    img.data[i + 2] = b;
  }
  return img;
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera focal lengths must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy) || !t.allFinite() || !R.allFinite())
    throw std::invalid_argument("camera parameters must be finite");
  const double ortho_err = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9) throw std::invalid_argument("camera rotation is not orthonormal");
  if (std::abs(R.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("camera rotation must have determinant +1");
}

bool all_finite(const PointCloud& cloud) {
  for (const auto& p : cloud.points)
    if (!p.allFinite()) return false;
  return true;
}

void validate_mesh(const TriangleMesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  for (const auto& v : mesh.vertices)
    if (!v.allFinite()) throw std::invalid_argument("mesh vertex is not finite");
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    for (int idx : face)
      if (idx < 0 || idx >= n)
        throw std::invalid_argument("mesh face " + std::to_string(f) + " has out-of-range vertex index");
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
      throw std::invalid_argument("mesh face " + std::to_string(f) + " repeats a vertex");
  }
}

double squared_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace pcrk
