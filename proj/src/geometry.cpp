#include "caustic/geometry.hpp"

#include <string>

namespace caustic {

void LensSurface::validate() const {
  if (grid_w < 2 || grid_h < 2) throw ConfigError("lens grid needs at least 2x2 vertices");
  if (heights.size() != static_cast<std::size_t>(grid_w) * grid_h)
    throw ConfigError("lens height array does not match grid size");
  for (std::size_t v = 0; v < heights.size(); ++v) {
    if (!(heights[v] > front_z))
      throw GeometryError("back vertex " + std::to_string(v) + " is not behind the front face");
  }
}

LensSurface build_grid_lens(int grid_w, int grid_h, double width, double height, double front_z,
                            double initial_height, double refractive_index) {
  if (grid_w < 2 || grid_h < 2) throw ConfigError("lens grid needs at least 2x2 vertices");
  if (!(width > 0) || !(height > 0)) throw ConfigError("lens extent must be positive");
  if (!(initial_height > front_z)) throw ConfigError("initial back height must exceed front_z");
  if (!(refractive_index >= 1.0)) throw ConfigError("refractive index must be >= 1");

  LensSurface lens;
  lens.grid_w = grid_w;
  lens.grid_h = grid_h;
  lens.front_z = front_z;
  lens.width = width;
  lens.height = height;
  lens.refractive_index = refractive_index;
  lens.heights.assign(static_cast<std::size_t>(grid_w) * grid_h, initial_height);
  lens.triangles.reserve(2 * static_cast<std::size_t>(grid_w - 1) * (grid_h - 1));
  for (int j = 0; j + 1 < grid_h; ++j) {
    for (int i = 0; i + 1 < grid_w; ++i) {
      const int a = j * grid_w + i, b = a + 1, c = a + grid_w + 1, d = a + grid_w;
      // Twice the cell centre relative to the grid centre.
      const int cx = 2 * i + 2 - grid_w, cy = 2 * j + 2 - grid_h;
      if ((cx > 0) == (cy > 0) || cx == 0 || cy == 0) {
        lens.triangles.push_back({a, b, c});
        lens.triangles.push_back({a, c, d});
      } else {
        lens.triangles.push_back({a, b, d});
        lens.triangles.push_back({b, c, d});
      }
    }
  }
  return lens;
}

Rect pixel_rect(const ImagePlane& plane, int u, int v) {
  if (u < 0 || v < 0 || u >= plane.res_w || v >= plane.res_h)
    throw std::out_of_range("pixel index out of range");
  return {plane.column_edge(u), plane.column_edge(u + 1), plane.row_edge(v), plane.row_edge(v + 1)};
}

Vec3 face_normal(const LensSurface& lens, std::size_t triangle_index) {
  const auto& t = lens.triangles.at(triangle_index);
  return triangle_normal(lens.vertex(t[0]), lens.vertex(t[1]), lens.vertex(t[2]));
}

}  // namespace caustic
