#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "caustic/error.hpp"
#include "caustic/vec.hpp"

namespace caustic {

/// Projected triangles with less area than this carry no flux.
inline constexpr double kDegenerateArea = 1e-14;

/// Axis-aligned rectangle [x0, x1] x [y0, y1] in cm.
struct Rect {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

/// Lens with a planar front face at z = front_z and a triangulated height
/// field as back face. Vertex (i, j) sits at a fixed (x, y) on a regular
/// grid over the front-face rectangle; only its height changes.
///
/// Vertices are numbered j * grid_w + i with i along x. Each grid quad is
/// split into two counter-clockwise triangles (normals toward +z) along the
/// diagonal that runs radially from the grid centre: (i, j)-(i+1, j+1) in
/// the (+,+) and (-,-) quadrants and on the axes, (i+1, j)-(i, j+1) in the
/// other two. The mesh is then mirror symmetric about both axes whenever the
/// quad count per side is even.
struct LensSurface {
  int grid_w = 0;
  int grid_h = 0;
  double front_z = 0;
  double width = 0;   ///< extent along x (cm)
  double height = 0;  ///< extent along y (cm)
  double refractive_index = 1.49;
  std::vector<double> heights;
  std::vector<std::array<int, 3>> triangles;

  std::size_t num_vertices() const { return heights.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double vertex_x(int idx) const { return -0.5 * width + width * (idx % grid_w) / (grid_w - 1); }
  double vertex_y(int idx) const { return -0.5 * height + height * (idx / grid_w) / (grid_h - 1); }
  Vec3 vertex(int idx) const { return {vertex_x(idx), vertex_y(idx), heights[idx]}; }

  bool is_boundary(int idx) const {
    const int i = idx % grid_w, j = idx / grid_w;
    return i == 0 || j == 0 || i == grid_w - 1 || j == grid_h - 1;
  }

  /// Throws GeometryError if any back vertex is not strictly behind the front face.
  void validate() const;
};

LensSurface build_grid_lens(int grid_w, int grid_h, double width, double height, double front_z,
                            double initial_height, double refractive_index);

/// Receiving plane. Pixel (u, v) covers the u-th column from the min-x edge
/// and the v-th row from the min-y edge; pixel (0, 0) is the min corner.
/// Images are stored row-major with index v * res_w + u.
struct ImagePlane {
  double z = 0;
  double width = 0;
  double height = 0;
  int res_w = 0;
  int res_h = 0;

  int num_pixels() const { return res_w * res_h; }
  double pixel_w() const { return width / res_w; }
  double pixel_h() const { return height / res_h; }
  Rect extent() const { return {-0.5 * width, 0.5 * width, -0.5 * height, 0.5 * height}; }
  double column_edge(int u) const { return -0.5 * width + width * u / res_w; }
  double row_edge(int v) const { return -0.5 * height + height * v / res_h; }
};

Rect pixel_rect(const ImagePlane& plane, int u, int v);

template <typename T>
struct Triangle2DT {
  std::array<Vec2T<T>, 3> p;

  T signed_area() const {
    return 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
  }
  bool degenerate() const {
    const double a = value_of(signed_area());
    return (a < 0 ? -a : a) < kDegenerateArea;
  }
};

using Triangle2D = Triangle2DT<double>;

/// Unit normal of a positively oriented triangle, (v2 - v1) x (v3 - v1) normalized.
template <typename T>
Vec3T<T> triangle_normal(const Vec3T<T>& v1, const Vec3T<T>& v2, const Vec3T<T>& v3) {
  const Vec3T<T> c = cross(v2 - v1, v3 - v1);
  const double len2 = value_of(dot(c, c));
  if (!(len2 > 0.0)) throw GeometryError("zero-area triangle has no normal");
  return normalized(c);
}

Vec3 face_normal(const LensSurface& lens, std::size_t triangle_index);

}  // namespace caustic
