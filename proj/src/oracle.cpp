#include "caustic/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "caustic/optics.hpp"

namespace caustic {

PointSourceSet dense_grid_sources(int grid_n, double size, SourceProfile profile) {
  if (grid_n < 1) throw ConfigError("dense grid needs grid_n >= 1");
  if (!(size > 0)) throw ConfigError("source size must be positive");
  PointSourceSet set;
  set.size = size;
  const double sigma = size / 3.0;
  for (int j = 0; j < grid_n; ++j) {
    for (int i = 0; i < grid_n; ++i) {
      const double x = size * ((i + 0.5) / grid_n - 0.5);
      const double y = size * ((j + 0.5) / grid_n - 0.5);
      const double q =
          profile == SourceProfile::Uniform ? 1.0 : std::exp(-(x * x + y * y) / (2 * sigma * sigma));
      set.emitters.push_back({x, y, q});
    }
  }
  return set.normalized();
}

FluxImage dense_grid_flux(int grid_n, double size, const LensSurface& lens, const ImagePlane& plane,
                          SourceProfile profile, const RenderOptions& options) {
  return render_flux(dense_grid_sources(grid_n, size, profile), lens, plane, options);
}

GrayImage dense_grid_render(int grid_n, double size, const LensSurface& lens, const ImagePlane& plane,
                            std::optional<double> total_brightness, SourceProfile profile,
                            const RenderOptions& options) {
  const FluxImage flux = dense_grid_flux(grid_n, size, lens, plane, profile, options);
  double brightness = 0;
  if (total_brightness) {
    brightness = *total_brightness;
  } else {
    const double peak = *std::max_element(flux.data.begin(), flux.data.end());
    if (!(peak > 0)) throw ConfigError("dense-grid render holds no flux");
    brightness = flux.total() / peak;
  }
  return flux_to_gray(flux, brightness);
}

double snell_bisection(const Vec3& source, const Vec3& back_vertex, double front_z, double eta) {
  const Vec3 rel = back_vertex - source;
  const double z0 = front_z - source.z;
  if (!(z0 > 0 && rel.z > z0)) throw GeometryError("snell_bisection: require source.z < front_z < back_vertex.z");
  const double r = std::hypot(rel.x, rel.y);
  if (r * r < kAxialTolerance2) return eta * z0 / (eta * z0 + (rel.z - z0));

  // Incident point at lateral distance k r; sines of the two ray angles.
  auto mismatch = [&](double k) {
    const double sin_in = k * r / std::hypot(k * r, z0);
    const double sin_lens = (1 - k) * r / std::hypot((1 - k) * r, rel.z - z0);
    return sin_in - eta * sin_lens;
  };
  double lo = 0, hi = 1;
  if (!(mismatch(lo) < 0 && mismatch(hi) > 0)) throw GeometryError("snell_bisection: no sign change on [0, 1]");
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mismatch(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

AreaEstimate montecarlo_clip_area(const Triangle2D& tri, const Rect& rect, std::int64_t samples,
                                  std::uint64_t seed) {
  if (samples < 2) throw ConfigError("montecarlo_clip_area needs at least two samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(rect.x0, rect.x1), uy(rect.y0, rect.y1);
  const double orient = tri.signed_area() >= 0 ? 1.0 : -1.0;
  auto side = [&](const Vec2& a, const Vec2& b, double x, double y) {
    return orient * ((b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x));
  };
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < samples; ++s) {
    const double x = ux(rng), y = uy(rng);
    if (side(tri.p[0], tri.p[1], x, y) >= 0 && side(tri.p[1], tri.p[2], x, y) >= 0 &&
        side(tri.p[2], tri.p[0], x, y) >= 0)
      ++hits;
  }
  const double p = double(hits) / samples;
  return {p * rect.area(), rect.area() * std::sqrt(p * (1 - p) / (samples - 1))};
}

}  // namespace caustic
