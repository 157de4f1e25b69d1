#include "pcrk/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace pcrk {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw IoError(path + ": " + msg);
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) fail(path, "cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary : std::ios::out);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

double parse_double(const std::string& path, const std::string& token) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) fail(path, "malformed number '" + token + "'");
    if (!std::isfinite(v)) fail(path, "non-finite value '" + token + "'");
    return v;
  } catch (const IoError&) {
    throw;
  } catch (const std::exception&) {
    fail(path, "malformed number '" + token + "'");
  }
}

long parse_long(const std::string& path, const std::string& token) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(token, &pos);
    if (pos != token.size()) fail(path, "malformed integer '" + token + "'");
    return v;
  } catch (const IoError&) {
    throw;
  } catch (const std::exception&) {
    fail(path, "malformed integer '" + token + "'");
  }
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

// Skips whitespace and '#' comments in a PNM header, then reads one token.
std::string pnm_token(const std::string& path, std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF) fail(path, "truncated header");
  std::string tok;
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

PointCloud read_xyz(const std::string& path) {
  auto in = open_in(path);
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks.size() != 3)
      fail(path, "line " + std::to_string(lineno) + ": expected 3 values, got " +
                     std::to_string(toks.size()));
    cloud.points.emplace_back(parse_double(path, toks[0]), parse_double(path, toks[1]),
                              parse_double(path, toks[2]));
  }
  return cloud;
}

void write_xyz(const std::string& path, const PointCloud& cloud) {
  auto out = open_out(path);
  for (const auto& p : cloud.points)
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z())
        << '\n';
  if (!out) fail(path, "write failed");
}

namespace {

struct PlyHeader {
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  int x_pos = -1, y_pos = -1, z_pos = -1;
  int vertex_props = 0;
  bool has_faces = false;
};

PlyHeader read_ply_header(const std::string& path, std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || tokens_of(line) != std::vector<std::string>{"ply"})
    fail(path, "missing ply magic");
  PlyHeader h;
  std::string current_element;
  bool saw_format = false;
  while (std::getline(in, line)) {
    const auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks[0] == "comment") continue;
    if (toks[0] == "format") {
      if (toks.size() < 2 || toks[1] != "ascii") fail(path, "only ascii ply is supported");
      saw_format = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) fail(path, "malformed element line");
      current_element = toks[1];
      const long n = parse_long(path, toks[2]);
      if (n < 0) fail(path, "negative element count");
      if (current_element == "vertex")
        h.vertex_count = static_cast<std::size_t>(n);
      else if (current_element == "face") {
        h.face_count = static_cast<std::size_t>(n);
        h.has_faces = true;
      } else
        fail(path, "unsupported element '" + current_element + "'");
    } else if (toks[0] == "property") {
      if (current_element == "vertex") {
        if (toks.size() == 3) {
          if (toks[2] == "x") h.x_pos = h.vertex_props;
          if (toks[2] == "y") h.y_pos = h.vertex_props;
          if (toks[2] == "z") h.z_pos = h.vertex_props;
          ++h.vertex_props;
        } else
          fail(path, "unsupported vertex property");
      }
      // face list property: accepted as-is
    } else if (toks[0] == "end_header") {
      if (!saw_format) fail(path, "missing format line");
      if (h.x_pos < 0 || h.y_pos < 0 || h.z_pos < 0) fail(path, "vertex element lacks x/y/z");
      return h;
    } else {
      fail(path, "unexpected header line '" + toks[0] + "'");
    }
  }
  fail(path, "missing end_header");
}

std::vector<Eigen::Vector3d> read_ply_vertices(const std::string& path, std::istream& in,
                                               const PlyHeader& h) {
  std::vector<Eigen::Vector3d> verts;
  verts.reserve(h.vertex_count);
  std::string line;
  while (verts.size() < h.vertex_count) {
    if (!std::getline(in, line)) fail(path, "truncated vertex list");
    const auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (static_cast<int>(toks.size()) != h.vertex_props) fail(path, "malformed vertex line");
    verts.emplace_back(parse_double(path, toks[h.x_pos]), parse_double(path, toks[h.y_pos]),
                       parse_double(path, toks[h.z_pos]));
  }
  return verts;
}

}  // namespace

PointCloud read_ply_cloud(const std::string& path) {
  auto in = open_in(path);
  const PlyHeader h = read_ply_header(path, in);
  PointCloud cloud;
  cloud.points = read_ply_vertices(path, in, h);
  return cloud;
}

void write_ply_cloud(const std::string& path, const PointCloud& cloud) {
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << cloud.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n"
      << "end_header\n";
  for (const auto& p : cloud.points)
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z())
        << '\n';
  if (!out) fail(path, "write failed");
}

TriangleMesh read_ply_mesh(const std::string& path) {
  auto in = open_in(path);
  const PlyHeader h = read_ply_header(path, in);
  if (!h.has_faces) fail(path, "mesh ply requires a face element");
  TriangleMesh mesh;
  mesh.vertices = read_ply_vertices(path, in, h);
  mesh.faces.reserve(h.face_count);
  std::string line;
  while (mesh.faces.size() < h.face_count) {
    if (!std::getline(in, line)) fail(path, "truncated face list");
    const auto toks = tokens_of(line);
    if (toks.empty()) continue;
    const long n = parse_long(path, toks[0]);
    if (n != 3) fail(path, "only triangular faces are supported");
    if (toks.size() != 4) fail(path, "malformed face line");
    mesh.faces.push_back({static_cast<int>(parse_long(path, toks[1])),
                          static_cast<int>(parse_long(path, toks[2])),
                          static_cast<int>(parse_long(path, toks[3]))});
  }
  try {
    validate_mesh(mesh);
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return mesh;
}

void write_ply_mesh(const std::string& path, const TriangleMesh& mesh) {
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << mesh.vertices.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.faces.size() << '\n'
      << "property list uchar int vertex_indices\n"
      << "end_header\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z())
        << '\n';
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  if (!out) fail(path, "write failed");
}

TriangleMesh read_obj(const std::string& path) {
  auto in = open_in(path);
  TriangleMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = tokens_of(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) fail(path, "line " + std::to_string(lineno) + ": malformed vertex");
      mesh.vertices.emplace_back(parse_double(path, toks[1]), parse_double(path, toks[2]),
                                 parse_double(path, toks[3]));
    } else if (toks[0] == "f") {
      if (toks.size() != 4)
        fail(path, "line " + std::to_string(lineno) + ": only triangular faces are supported");
      std::array<int, 3> face;
      for (int i = 0; i < 3; ++i) {
        std::string head = toks[i + 1];
        const auto slash = head.find('/');
        if (slash != std::string::npos) head = head.substr(0, slash);
        const long idx = parse_long(path, head);
        if (idx < 1) fail(path, "line " + std::to_string(lineno) + ": face index must be >= 1");
        face[i] = static_cast<int>(idx - 1);
      }
      mesh.faces.push_back(face);
    }
    // other directives (vn, vt, o, g, s, usemtl, ...) are ignored
  }
  try {
    validate_mesh(mesh);
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return mesh;
}

void write_obj(const std::string& path, const TriangleMesh& mesh) {
  auto out = open_out(path);
  for (const auto& v : mesh.vertices)
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
        << format_double(v.z()) << '\n';
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) fail(path, "write failed");
}

BinaryMask read_pgm_mask(const std::string& path) {
  auto in = open_in(path, true);
  const std::string magic = pnm_token(path, in);
  if (magic != "P2" && magic != "P5") fail(path, "expected P2 or P5 pgm");
  const long w = parse_long(path, pnm_token(path, in));
  const long h = parse_long(path, pnm_token(path, in));
  const long maxval = parse_long(path, pnm_token(path, in));
  if (w <= 0 || h <= 0) fail(path, "non-positive dimensions");
  if (maxval <= 0 || maxval > 255) fail(path, "maxval must be in [1, 255]");

  BinaryMask mask = BinaryMask::zeros(static_cast<int>(w), static_cast<int>(h));
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = parse_long(path, pnm_token(path, in));
      if (v < 0 || v > maxval) fail(path, "pixel value out of range");
      mask.bits[i] = v > 127 ? 1 : 0;
    }
  } else {
    std::vector<char> raw(n);
    in.read(raw.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) fail(path, "truncated pixel data");
    for (std::size_t i = 0; i < n; ++i)
      mask.bits[i] = static_cast<unsigned char>(raw[i]) > 127 ? 1 : 0;
  }
  return mask;
}

void write_pgm_mask(const std::string& path, const BinaryMask& mask) {
  if (mask.width <= 0 || mask.height <= 0) throw IoError(path + ": empty mask");
  auto out = open_out(path);
  out << "P2\n" << mask.width << ' ' << mask.height << "\n255\n";
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (c) out << ' ';
      out << (mask.at(r, c) ? 255 : 0);
    }
    out << '\n';
  }
  if (!out) fail(path, "write failed");
}

RgbImage read_ppm(const std::string& path) {
  auto in = open_in(path, true);
  const std::string magic = pnm_token(path, in);
  if (magic != "P6") fail(path, "expected P6 ppm");
  const long w = parse_long(path, pnm_token(path, in));
  const long h = parse_long(path, pnm_token(path, in));
  const long maxval = parse_long(path, pnm_token(path, in));
  if (w <= 0 || h <= 0) fail(path, "non-positive dimensions");
  if (maxval != 255) fail(path, "maxval must be 255");

  RgbImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  const std::size_t n = 3 * static_cast<std::size_t>(w) * h;
  img.data.resize(n);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) fail(path, "truncated pixel data");
  return img;
}

void write_ppm(const std::string& path, const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0) throw IoError(path + ": empty image");
  auto out = open_out(path, true);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  if (!out) fail(path, "write failed");
}

PointCloud read_cloud_any(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".xyz") return read_xyz(path);
  if (ext == ".ply") return read_ply_cloud(path);
  fail(path, "unsupported point cloud extension (expected .xyz or .ply)");
}

Camera read_camera_txt(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) vals.push_back(parse_double(path, tok));
  if (vals.size() != 16) fail(path, "expected 16 numbers (fx fy cx cy, R row-major, t)");
  Camera cam;
  cam.fx = vals[0];
  cam.fy = vals[1];
  cam.cx = vals[2];
  cam.cy = vals[3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.R(r, c) = vals[4 + 3 * r + c];
  cam.t = Eigen::Vector3d(vals[13], vals[14], vals[15]);
  try {
    cam.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return cam;
}

void write_camera_txt(const std::string& path, const Camera& cam) {
  auto out = open_out(path);
  out << format_double(cam.fx) << ' ' << format_double(cam.fy) << ' ' << format_double(cam.cx)
      << ' ' << format_double(cam.cy) << '\n';
  for (int r = 0; r < 3; ++r)
    out << format_double(cam.R(r, 0)) << ' ' << format_double(cam.R(r, 1)) << ' '
        << format_double(cam.R(r, 2)) << '\n';
  out << format_double(cam.t.x()) << ' ' << format_double(cam.t.y()) << ' '
      << format_double(cam.t.z()) << '\n';
  if (!out) fail(path, "write failed");
}

Eigen::Matrix3d read_matrix3_txt(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) vals.push_back(parse_double(path, tok));
  if (vals.size() != 9) fail(path, "expected 9 numbers (3x3, row-major)");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = vals[3 * r + c];
  return m;
}

}  // namespace pcrk
