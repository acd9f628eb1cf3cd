#include "caustic/curvature.hpp"

#include <algorithm>
#include <array>

namespace caustic {
namespace {

constexpr std::size_t kRingWidth = 9;  // vertex plus up to 8 grid neighbours
using RingDual = Dual<kRingWidth>;

std::vector<std::vector<int>> faces_per_vertex(const LensSurface& lens) {
  std::vector<std::vector<int>> out(lens.num_vertices());
  for (std::size_t f = 0; f < lens.num_triangles(); ++f)
    for (int v : lens.triangles[f]) out[v].push_back(static_cast<int>(f));
  return out;
}

/// Rotates face f so that vertex v comes first, keeping the winding.
std::array<int, 3> rotate_to(const std::array<int, 3>& t, int v) {
  if (t[1] == v) return {t[1], t[2], t[0]};
  if (t[2] == v) return {t[2], t[0], t[1]};
  return t;
}

template <typename T, typename Position>
T vertex_curvature(const LensSurface& lens, int v, const std::vector<int>& faces, Position&& pos, bool& degenerate) {
  degenerate = false;
  Vec3T<T> lap{T(0.0), T(0.0), T(0.0)};
  Vec3T<T> normal_sum{T(0.0), T(0.0), T(0.0)};
  T mixed(0.0);
  const Vec3T<T> pv = pos(v);
  for (int f : faces) {
    const auto t = rotate_to(lens.triangles[f], v);
    const Vec3T<T> pa = pos(t[1]), pb = pos(t[2]);
    const Vec3T<T> ea = pa - pv, eb = pb - pv;
    const Vec3T<T> c = cross(ea, eb);
    const T twice_area = norm(c);
    normal_sum += c;
    const T cot_a = dot(pv - pa, pb - pa) / twice_area;
    const T cot_b = dot(pv - pb, pa - pb) / twice_area;
    lap += 0.5 * (cot_a * eb + cot_b * ea);

    const double at_v = value_of(dot(ea, eb));
    const double at_a = value_of(dot(pv - pa, pb - pa));
    const double at_b = value_of(dot(pv - pb, pa - pb));
    if (at_v >= 0 && at_a >= 0 && at_b >= 0) mixed += 0.125 * (dot(eb, eb) * cot_a + dot(ea, ea) * cot_b);
    else if (at_v < 0) mixed += 0.25 * twice_area;
    else mixed += 0.125 * twice_area;
  }
  if (!(value_of(mixed) > 1e-300) || value_of(dot(normal_sum, normal_sum)) == 0.0) {
    degenerate = true;
    return T(0.0);
  }
  return -dot(lap, normalized(normal_sum)) / (2.0 * mixed);
}

std::vector<int> one_ring(const LensSurface& lens, int v, const std::vector<int>& faces) {
  std::vector<int> ring{v};
  for (int f : faces)
    for (int w : lens.triangles[f])
      if (std::find(ring.begin(), ring.end(), w) == ring.end()) ring.push_back(w);
  return ring;
}

template <typename T>
T face_area(const Vec3T<T>& a, const Vec3T<T>& b, const Vec3T<T>& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace

std::vector<double> vertex_mean_curvature(const LensSurface& lens) {
  const auto faces = faces_per_vertex(lens);
  std::vector<double> h(lens.num_vertices(), 0.0);
  auto pos = [&](int w) { return lens.vertex(w); };
  for (std::size_t v = 0; v < h.size(); ++v) {
    if (lens.is_boundary(static_cast<int>(v))) continue;
    bool degenerate = false;
    h[v] = vertex_curvature<double>(lens, static_cast<int>(v), faces[v], pos, degenerate);
  }
  return h;
}

double e_smooth(const LensSurface& lens) {
  const auto h = vertex_mean_curvature(lens);
  double e = 0;
  for (const auto& t : lens.triangles) {
    const double hf = (h[t[0]] + h[t[1]] + h[t[2]]) / 3.0;
    e += hf * hf * face_area(lens.vertex(t[0]), lens.vertex(t[1]), lens.vertex(t[2]));
  }
  return e;
}

SmoothnessTerm e_smooth_with_gradient(const LensSurface& lens) {
  const auto faces = faces_per_vertex(lens);
  const std::size_t nv = lens.num_vertices();
  SmoothnessTerm out;
  out.gradient.assign(nv, 0.0);

  std::vector<RingDual> h(nv, RingDual(0.0));
  std::vector<std::vector<int>> rings(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const int vi = static_cast<int>(v);
    if (lens.is_boundary(vi)) continue;
    rings[v] = one_ring(lens, vi, faces[v]);
    if (rings[v].size() > kRingWidth) throw GeometryError("one-ring wider than the curvature stencil");
    const auto& ring = rings[v];
    auto pos = [&](int w) {
      const std::size_t slot = std::find(ring.begin(), ring.end(), w) - ring.begin();
      return Vec3T<RingDual>{RingDual(lens.vertex_x(w)), RingDual(lens.vertex_y(w)),
                             RingDual::variable(lens.heights[w], slot)};
    };
    bool degenerate = false;
    h[v] = vertex_curvature<RingDual>(lens, vi, faces[v], pos, degenerate);
    if (degenerate) ++out.degenerate_vertices;
  }

  std::vector<double> vertex_weight(nv, 0.0);
  for (const auto& t : lens.triangles) {
    std::array<Vec3T<Dual<3>>, 3> p;
    for (int j = 0; j < 3; ++j)
      p[j] = {Dual<3>(lens.vertex_x(t[j])), Dual<3>(lens.vertex_y(t[j])), Dual<3>::variable(lens.heights[t[j]], j)};
    const Dual<3> area = face_area(p[0], p[1], p[2]);
    const double hf = (h[t[0]].v + h[t[1]].v + h[t[2]].v) / 3.0;
    out.value += hf * hf * area.v;
    for (int j = 0; j < 3; ++j) {
      out.gradient[t[j]] += hf * hf * area.d[j];
      vertex_weight[t[j]] += 2.0 * area.v * hf / 3.0;
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (rings[v].empty() || vertex_weight[v] == 0.0) continue;
    for (std::size_t s = 0; s < rings[v].size(); ++s) out.gradient[rings[v][s]] += vertex_weight[v] * h[v].d[s];
  }
  return out;
}

}  // namespace caustic
