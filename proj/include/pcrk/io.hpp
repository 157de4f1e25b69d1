#pragma once

#include <string>

#include "pcrk/errors.hpp"
#include "pcrk/types.hpp"

namespace pcrk {

// All readers throw IoError on missing files or malformed content, naming the
// file. Writers emit deterministic text (17 significant digits for doubles)
// so identical data produces identical bytes.

PointCloud read_xyz(const std::string& path);
void write_xyz(const std::string& path, const PointCloud& cloud);

PointCloud read_ply_cloud(const std::string& path);
void write_ply_cloud(const std::string& path, const PointCloud& cloud);

TriangleMesh read_ply_mesh(const std::string& path);
void write_ply_mesh(const std::string& path, const TriangleMesh& mesh);

TriangleMesh read_obj(const std::string& path);
void write_obj(const std::string& path, const TriangleMesh& mesh);

// PGM P2 or P5; pixel values > 127 map to foreground. Writes P2 with 0/255.
BinaryMask read_pgm_mask(const std::string& path);
void write_pgm_mask(const std::string& path, const BinaryMask& mask);

// PPM P6 only.
RgbImage read_ppm(const std::string& path);
void write_ppm(const std::string& path, const RgbImage& image);

// Reads a point cloud by extension: .xyz or .ply.
PointCloud read_cloud_any(const std::string& path);

// Text file with 16 whitespace-separated numbers: fx fy cx cy, then R row
// major (9), then t (3).
Camera read_camera_txt(const std::string& path);
void write_camera_txt(const std::string& path, const Camera& cam);

// Text file with 9 whitespace-separated numbers, row major.
Eigen::Matrix3d read_matrix3_txt(const std::string& path);

std::string format_double(double v);

}  // namespace pcrk
