#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace pcrk {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
};

// Row-major binary mask. bits[row * width + col] is 0 or 1.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  static BinaryMask zeros(int width, int height);

  bool at(int row, int col) const { return bits[static_cast<std::size_t>(row) * width + col] != 0; }
  void set(int row, int col, bool v) {
    bits[static_cast<std::size_t>(row) * width + col] = v ? 1 : 0;
  }
  std::size_t count() const;
  bool same_shape(const BinaryMask& other) const {
    return width == other.width && height == other.height;
  }
};

// Interleaved 8-bit RGB, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 3 * width * height bytes

  static RgbImage filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  std::uint8_t* pixel(int row, int col) {
    return data.data() + 3 * (static_cast<std::size_t>(row) * width + col);
  }
  const std::uint8_t* pixel(int row, int col) const {
    return data.data() + 3 * (static_cast<std::size_t>(row) * width + col);
  }
  bool same_shape(const RgbImage& other) const {
    return width == other.width && height == other.height;
  }
};

// Pinhole camera. Projects world point p via K [R t]: first x' = R p + t,
// then u = fx x'/z' + cx, v = fy y'/z' + cy.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  // Throws std::invalid_argument if fx/fy are not positive or R is not a
  // rotation (orthonormal, det +1, tolerance 1e-9).
  void validate() const;
};

bool all_finite(const PointCloud& cloud);

// Throws std::invalid_argument on out-of-range indices, repeated indices
// within a face, or non-finite vertices.
void validate_mesh(const TriangleMesh& mesh);

double squared_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

}  // namespace pcrk
