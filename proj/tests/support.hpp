#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "caustic/geometry.hpp"
#include "caustic/image.hpp"
#include "caustic/sources.hpp"

namespace caustic::test {

/// Smooth bumps on a flat back surface; every height stays above front_z.
inline LensSurface bumpy_lens(int grid, double width, double front_z, double base, double amplitude,
                              double phase = 0.0, double eta = 1.49) {
  LensSurface lens = build_grid_lens(grid, grid, width, width, front_z, base, eta);
  for (std::size_t v = 0; v < lens.num_vertices(); ++v) {
    const double x = lens.vertex_x(static_cast<int>(v)) / width, y = lens.vertex_y(static_cast<int>(v)) / width;
    lens.heights[v] = base + amplitude * (std::cos(5.0 * x + phase) * std::cos(4.0 * y - 0.5 * phase) +
                                          0.5 * std::sin(9.0 * x * y + 2.0 * phase));
  }
  return lens;
}

/// Emitters at random positions in the open source square.
inline PointSourceSet random_sources(int n, double size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-0.45 * size, 0.45 * size), q(0.5, 1.5);
  PointSourceSet set;
  set.size = size;
  for (int k = 0; k < n; ++k) set.emitters.push_back({pos(rng), pos(rng), q(rng)});
  return set;
}

/// Richardson-extrapolated central difference of f along coordinate i.
inline double richardson_fd(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                            std::size_t i, double h) {
  const double x0 = x[i];
  auto central = [&](double step) {
    x[i] = x0 + step;
    const double fp = f(x);
    x[i] = x0 - step;
    const double fm = f(x);
    x[i] = x0;
    return (fp - fm) / (2 * step);
  };
  return (4 * central(0.5 * h) - central(h)) / 3.0;
}

struct GradientComparison {
  std::size_t count = 0;
  std::size_t within_tight = 0;  ///< relative 1e-4 with 1e-6 absolute floor
  std::size_t within_loose = 0;  ///< relative 1e-3 with 1e-6 absolute floor
  double worst_ratio = 0;        ///< max error / allowed at the tight tolerance

  double tight_fraction() const { return count ? double(within_tight) / count : 1.0; }
  bool all_loose() const { return within_loose == count; }
};

inline bool within(double analytic, double fd, double rel, double abs_floor) {
  return std::abs(analytic - fd) <= std::max(rel * std::abs(fd), abs_floor);
}

inline GradientComparison compare_gradients(std::span<const double> analytic, std::span<const double> fd) {
  GradientComparison c;
  c.count = analytic.size();
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (within(analytic[i], fd[i], 1e-4, 1e-6)) ++c.within_tight;
    if (within(analytic[i], fd[i], 1e-3, 1e-6)) ++c.within_loose;
    c.worst_ratio = std::max(c.worst_ratio, std::abs(analytic[i] - fd[i]) / std::max(1e-4 * std::abs(fd[i]), 1e-6));
  }
  return c;
}

inline double max_abs_diff(const ImageGrid& a, const ImageGrid& b) {
  double m = 0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace caustic::test

#include <array>
#include <map>
#include <utility>

#include "caustic/vec.hpp"

namespace caustic::test {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

/// Unit icosahedron subdivided `levels` times, vertices on the unit sphere,
/// faces counter-clockwise seen from outside.
inline TriMesh icosphere(int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  for (const Vec3& p : {Vec3{-1, t, 0}, Vec3{1, t, 0}, Vec3{-1, -t, 0}, Vec3{1, -t, 0}, Vec3{0, -1, t},
                        Vec3{0, 1, t}, Vec3{0, -1, -t}, Vec3{0, 1, -t}, Vec3{t, 0, -1}, Vec3{t, 0, 1},
                        Vec3{-t, 0, -1}, Vec3{-t, 0, 1}})
    m.vertices.push_back(normalized(p));
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      m.vertices.push_back(normalized(m.vertices[a] + m.vertices[b]));
      return mid[key] = static_cast<int>(m.vertices.size()) - 1;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : m.faces) {
      const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    m.faces = std::move(next);
  }
  return m;
}

}  // namespace caustic::test
