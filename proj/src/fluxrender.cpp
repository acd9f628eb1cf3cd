#include "caustic/fluxrender.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

#include "caustic/clip.hpp"
#include "caustic/optics.hpp"
#include "caustic/parallel.hpp"

namespace caustic {

RenderDiagnostics& RenderDiagnostics::operator+=(const RenderDiagnostics& o) {
  pairs += o.pairs;
  total_internal_reflection += o.total_internal_reflection;
  missed_plane += o.missed_plane;
  degenerate += o.degenerate;
  emitted += o.emitted;
  lost += o.lost;
  return *this;
}

namespace {

enum class Mode { Value, Sources, Heights };
enum class PairStatus { Ok, TotalInternalReflection, Miss, Degenerate };

using D3 = Dual<3>;
using D1 = Dual<1>;

template <Mode M>
using ScalarOf = std::conditional_t<M == Mode::Value, double, D3>;
// Front-face incident points are computed once per (emitter, vertex). In
// height mode each depends on its own vertex height only, so one partial
// suffices until it is placed into the triangle's slot.
template <Mode M>
using FrontOf = std::conditional_t<M == Mode::Heights, D1, ScalarOf<M>>;

template <typename T>
struct PairTrace {
  T flux{};
  Triangle2DT<T> proj{};
};

template <typename T>
PairStatus trace_pair(const Vec3T<T>& src, const T& q, const std::array<Vec3T<T>, 3>& back,
                      const std::array<Vec3T<T>, 3>& front, double eta, double plane_z, PairTrace<T>& out) {
  T omega = solid_angle(src, front[0], front[1], front[2]);
  if (value_of(omega) < 0.0) omega = T(0.0);
  out.flux = q * omega;
  const Vec3T<T> n = triangle_normal(back[0], back[1], back[2]);
  for (int j = 0; j < 3; ++j) {
    const Vec3T<T> a = normalized(back[j] - front[j]);
    Vec3T<T> b;
    if (!try_refract_exit(a, n, eta, b)) return PairStatus::TotalInternalReflection;
    if (!(value_of(b.z) > 0.0)) return PairStatus::Miss;
    const Vec3T<T> p = project_to_plane(back[j], b, plane_z);
    out.proj.p[j] = {p.x, p.y};
  }
  return out.proj.degenerate() ? PairStatus::Degenerate : PairStatus::Ok;
}

/// Squared distance of each projected vertex to the image rectangle.
template <typename T>
T overshoot(const Triangle2DT<T>& tri, const Rect& ext) {
  T sum(0.0);
  for (const auto& p : tri.p) {
    T dx(0.0), dy(0.0);
    if (value_of(p.x) < ext.x0) dx = ext.x0 - p.x;
    else if (value_of(p.x) > ext.x1) dx = p.x - ext.x1;
    if (value_of(p.y) < ext.y0) dy = ext.y0 - p.y;
    else if (value_of(p.y) > ext.y1) dy = p.y - ext.y1;
    sum += dx * dx + dy * dy;
  }
  return sum;
}

/// A triangle clipped against grid lines. edge[i] is the triangle edge
/// (i from p[i] to p[i+1]) that polygon edge v[i] -> v[i+1] lies on, or -1
/// on a grid line.
struct TaggedPolygon {
  std::array<Vec2, 8> v;
  std::array<int, 8> edge;
  int n = 0;

  void push(const Vec2& p, int e) {
    v[n] = p;
    edge[n++] = e;
  }
};

/// Same arithmetic as clip_halfplane<double>, carrying edge tags along.
TaggedPolygon clip_tagged(const TaggedPolygon& in, Axis axis, double bound, bool keep_above) {
  TaggedPolygon out;
  auto coord = [axis](const Vec2& p) { return axis == Axis::X ? p.x : p.y; };
  auto inside = [&](const Vec2& p) { return keep_above ? coord(p) >= bound : coord(p) <= bound; };
  for (int i = 0; i < in.n; ++i) {
    const Vec2& a = in.v[i];
    const Vec2& b = in.v[(i + 1) % in.n];
    const bool ia = inside(a), ib = inside(b);
    if (ia) out.push(a, in.edge[i]);
    if (ia != ib) {
      const double ca = coord(a), cb = coord(b);
      const double t = (bound - ca) / (cb - ca);
      const Vec2 p = axis == Axis::X ? Vec2{bound, a.y + t * (b.y - a.y)} : Vec2{a.x + t * (b.x - a.x), bound};
      out.push(p, ia ? -1 : in.edge[i]);
    }
  }
  return out;
}

TaggedPolygon clip_tagged_slab(const TaggedPolygon& in, Axis axis, double lo, double hi) {
  return clip_tagged(clip_tagged(in, axis, lo, true), axis, hi, false);
}

/// Unsigned area of a clipped piece of `tri`. With `grad`, also its
/// derivative w.r.t. the triangle vertices: grid lines stay put, and a point
/// at parameter t on edge p[e] -> p[e+1] moves with weights (1 - t, t), so
/// each tagged polygon edge adds its outward normal times the integrated
/// weights.
double tagged_area(const TaggedPolygon& poly, const Triangle2D& tri, double orient, std::array<Vec2, 3>* grad) {
  double twice = 0.0;
  for (int i = 0; i < poly.n; ++i) {
    const Vec2& a = poly.v[i];
    const Vec2& b = poly.v[(i + 1) % poly.n];
    twice += a.x * b.y - b.x * a.y;
  }
  const double area = 0.5 * twice;
  if (grad) {
    *grad = {};
    for (int i = 0; i < poly.n; ++i) {
      const int e = poly.edge[i];
      if (e < 0) continue;
      const Vec2& p0 = tri.p[e];
      const Vec2& p1 = tri.p[(e + 1) % 3];
      const double dx = p1.x - p0.x, dy = p1.y - p0.y;
      const double dd = dx * dx + dy * dy;
      const Vec2& a = poly.v[i];
      const Vec2& b = poly.v[(i + 1) % poly.n];
      double t0 = ((a.x - p0.x) * dx + (a.y - p0.y) * dy) / dd;
      double t1 = ((b.x - p0.x) * dx + (b.y - p0.y) * dy) / dd;
      if (t0 > t1) std::swap(t0, t1);
      const double w1 = 0.5 * (t1 * t1 - t0 * t0);
      const double w0 = (t1 - t0) - w1;
      const double nx = orient * dy, ny = -orient * dx;
      (*grad)[e].x += w0 * nx;
      (*grad)[e].y += w0 * ny;
      (*grad)[(e + 1) % 3].x += w1 * nx;
      (*grad)[(e + 1) % 3].y += w1 * ny;
    }
  }
  return area < 0 ? -area : area;
}

/// Splits `flux` over pixels by the area fraction of tri inside each pixel.
/// Candidate pixels come from a column scan of the bounding box; each
/// candidate is clipped exactly. Clipping runs on values only; partials of
/// the clipped areas are assembled from the vertex partials.
template <typename T, typename Emit>
void allocate(const Triangle2DT<T>& tri, const T& flux, const ImagePlane& plane, Emit&& emit) {
  constexpr bool with_partials = !std::is_same_v<T, double>;
  T area = tri.signed_area();
  const double orient = value_of(area) < 0 ? -1.0 : 1.0;
  if (value_of(area) < 0) area = -area;
  const T density = flux / area;

  Triangle2D flat;
  for (int j = 0; j < 3; ++j) flat.p[j] = {value_of(tri.p[j].x), value_of(tri.p[j].y)};
  double minx = flat.p[0].x, maxx = minx, miny = flat.p[0].y, maxy = miny;
  for (int j = 1; j < 3; ++j) {
    minx = std::min(minx, flat.p[j].x);
    maxx = std::max(maxx, flat.p[j].x);
    miny = std::min(miny, flat.p[j].y);
    maxy = std::max(maxy, flat.p[j].y);
  }
  const Rect ext = plane.extent();
  if (maxx <= ext.x0 || minx >= ext.x1 || maxy <= ext.y0 || miny >= ext.y1) return;

  auto cell_index = [](double c, double lo, double size, int n) {
    return std::clamp(static_cast<int>(std::floor((c - lo) / size)), 0, n - 1);
  };
  int u0 = cell_index(minx, ext.x0, plane.pixel_w(), plane.res_w);
  int u1 = cell_index(maxx, ext.x0, plane.pixel_w(), plane.res_w);
  int v0 = cell_index(miny, ext.y0, plane.pixel_h(), plane.res_h);
  int v1 = cell_index(maxy, ext.y0, plane.pixel_h(), plane.res_h);
  // Guard the floor() against rounding at pixel edges.
  if (u0 > 0 && plane.column_edge(u0) > minx) --u0;
  if (u1 + 1 < plane.res_w && plane.column_edge(u1 + 1) < maxx) ++u1;
  if (v0 > 0 && plane.row_edge(v0) > miny) --v0;
  if (v1 + 1 < plane.res_h && plane.row_edge(v1 + 1) < maxy) ++v1;

  if (u0 == u1 && v0 == v1) {
    const Rect px = pixel_rect(plane, u0, v0);
    if (minx >= px.x0 && maxx <= px.x1 && miny >= px.y0 && maxy <= px.y1) {
      emit(v0 * plane.res_w + u0, flux);
      return;
    }
  }

  auto emit_cell = [&](int pixel, double a, const std::array<Vec2, 3>& g) {
    if constexpr (with_partials) {
      T c = a * density;
      for (std::size_t s = 0; s < c.d.size(); ++s) {
        double da = 0.0;
        for (int j = 0; j < 3; ++j) da += g[j].x * tri.p[j].x.d[s] + g[j].y * tri.p[j].y.d[s];
        c.d[s] += density.v * da;
      }
      emit(pixel, c);
    } else {
      emit(pixel, a * density);
    }
  };

  TaggedPolygon poly;
  for (int j = 0; j < 3; ++j) poly.push(flat.p[j], j);
  std::array<Vec2, 3> g{};
  for (int u = u0; u <= u1; ++u) {
    const double xl = plane.column_edge(u), xr = plane.column_edge(u + 1);
    const TaggedPolygon column = clip_tagged_slab(poly, Axis::X, xl, xr);
    if (column.n < 3) continue;
    double cy0 = column.v[0].y, cy1 = cy0;
    // y-extent of the column polygon along both column edges; rows inside
    // both are covered completely.
    constexpr double inf = std::numeric_limits<double>::infinity();
    double l_lo = inf, l_hi = -inf, r_lo = inf, r_hi = -inf;
    for (int i = 0; i < column.n; ++i) {
      const double x = column.v[i].x, y = column.v[i].y;
      cy0 = std::min(cy0, y);
      cy1 = std::max(cy1, y);
      if (x == xl) l_lo = std::min(l_lo, y), l_hi = std::max(l_hi, y);
      if (x == xr) r_lo = std::min(r_lo, y), r_hi = std::max(r_hi, y);
    }
    const double in_lo = std::max(l_lo, r_lo), in_hi = std::min(l_hi, r_hi);
    int r0 = cell_index(cy0, ext.y0, plane.pixel_h(), plane.res_h);
    int r1 = cell_index(cy1, ext.y0, plane.pixel_h(), plane.res_h);
    if (r0 > 0 && plane.row_edge(r0) > cy0) --r0;
    if (r1 + 1 < plane.res_h && plane.row_edge(r1 + 1) < cy1) ++r1;
    r0 = std::max(r0, v0);
    r1 = std::min(r1, v1);
    for (int v = r0; v <= r1; ++v) {
      const double yb = plane.row_edge(v), yt = plane.row_edge(v + 1);
      if (yb >= in_lo && yt <= in_hi) {
        emit_cell(v * plane.res_w + u, (xr - xl) * (yt - yb), {});
        continue;
      }
      const TaggedPolygon cell = clip_tagged_slab(column, Axis::Y, yb, yt);
      if (cell.n < 3) continue;
      const double a = tagged_area(cell, flat, orient, with_partials ? &g : nullptr);
      if (a == 0.0) continue;
      emit_cell(v * plane.res_w + u, a, g);
    }
  }
}

struct PairKey {
  int source;
  std::array<int, 3> vertices;
  double out_weight;  ///< q_k / sum q
};

/// Accumulates flux values, escaped flux, out penalty and diagnostics.
struct ValueSink {
  FluxImage image;
  RenderDiagnostics diag;
  double out = 0;
  double allocated = 0;

  ValueSink(const ImagePlane& plane) : image(plane.res_w, plane.res_h) {}

  void begin(const PairKey&) { allocated = 0; }
  template <typename T>
  void add(int pixel, const T& c) {
    image[pixel] += value_of(c);
    allocated += value_of(c);
  }
  template <typename T>
  void finish_values(const PairKey& key, PairStatus status, const PairTrace<T>& trace, const Rect& ext) {
    const double flux = value_of(trace.flux);
    ++diag.pairs;
    diag.emitted += flux;
    switch (status) {
      case PairStatus::TotalInternalReflection:
        ++diag.total_internal_reflection;
        diag.lost += flux;
        return;
      case PairStatus::Miss:
        ++diag.missed_plane;
        diag.lost += flux;
        return;
      case PairStatus::Degenerate:
        ++diag.degenerate;
        diag.lost += flux;
        break;
      case PairStatus::Ok:
        image.escaped += flux - allocated;
        break;
    }
    Triangle2D flat;
    for (int j = 0; j < 3; ++j) flat.p[j] = {value_of(trace.proj.p[j].x), value_of(trace.proj.p[j].y)};
    out += key.out_weight * overshoot(flat, ext);
  }
  void finish(const PairKey& key, PairStatus status, const PairTrace<double>& trace, const Rect& ext) {
    finish_values(key, status, trace, ext);
  }
  void merge_into(ValueSink& total) const {
    total.image += image;
    total.diag += diag;
    total.out += out;
  }
};

/// Contracts dual flux contributions with per-pixel weights.
template <Mode M>
struct AdjointSink : ValueSink {
  std::span<const double> weights;
  double out_weight;
  std::vector<double> grad;
  std::array<double, 3> acc{};

  AdjointSink(const ImagePlane& plane, std::span<const double> w, double ow, std::size_t nvars)
      : ValueSink(plane), weights(w), out_weight(ow), grad(nvars, 0.0) {}

  void begin(const PairKey& key) {
    ValueSink::begin(key);
    acc = {};
  }
  void add(int pixel, const D3& c) {
    ValueSink::add(pixel, c);
    const double w = weights[pixel];
    for (int s = 0; s < 3; ++s) acc[s] += w * c.d[s];
  }
  void finish(const PairKey& key, PairStatus status, const PairTrace<D3>& trace, const Rect& ext) {
    finish_values(key, status, trace, ext);
    if (M == Mode::Heights && out_weight != 0.0 &&
        (status == PairStatus::Ok || status == PairStatus::Degenerate)) {
      const D3 pen = overshoot(trace.proj, ext);
      for (int s = 0; s < 3; ++s) acc[s] += out_weight * key.out_weight * pen.d[s];
    }
    for (int s = 0; s < 3; ++s) {
      if constexpr (M == Mode::Heights) grad[key.vertices[s]] += acc[s];
      else grad[3 * key.source + s] += acc[s];
    }
  }
  void merge_into(AdjointSink& total) const {
    ValueSink::merge_into(total);
    for (std::size_t i = 0; i < grad.size(); ++i) total.grad[i] += grad[i];
  }
};

/// Collects the full dense Jacobian (small scenes only).
template <Mode M>
struct JacobianSink : ValueSink {
  FluxJacobian jac;
  PairKey current{};

  JacobianSink(const ImagePlane& plane, std::size_t nvars) : ValueSink(plane) {
    jac.pixels = plane.num_pixels();
    jac.variables = nvars;
    jac.data.assign(jac.pixels * nvars, 0.0);
  }
  void begin(const PairKey& key) {
    ValueSink::begin(key);
    current = key;
  }
  void add(int pixel, const D3& c) {
    ValueSink::add(pixel, c);
    for (int s = 0; s < 3; ++s) {
      const std::size_t var = M == Mode::Heights ? current.vertices[s] : 3 * current.source + s;
      jac.data[pixel * jac.variables + var] += c.d[s];
    }
  }
  void finish(const PairKey& key, PairStatus status, const PairTrace<D3>& trace, const Rect& ext) {
    finish_values(key, status, trace, ext);
  }
  void merge_into(JacobianSink& total) const {
    ValueSink::merge_into(total);
    for (std::size_t i = 0; i < jac.data.size(); ++i) total.jac.data[i] += jac.data[i];
  }
};

/// Records the partials of every contribution for a later contraction.
template <Mode M>
struct DeferredSink : ValueSink {
  std::vector<DeferredAdjoint::Entry> entries;
  std::array<int, 3> vars{};

  explicit DeferredSink(const ImagePlane& plane) : ValueSink(plane) {}

  void begin(const PairKey& key) {
    ValueSink::begin(key);
    if constexpr (M == Mode::Heights) vars = key.vertices;
    else vars = {3 * key.source, 3 * key.source + 1, 3 * key.source + 2};
  }
  void add(int pixel, const D3& c) {
    ValueSink::add(pixel, c);
    entries.push_back({pixel, vars, c.d});
  }
  void finish(const PairKey& key, PairStatus status, const PairTrace<D3>& trace, const Rect& ext) {
    finish_values(key, status, trace, ext);
    if (M == Mode::Heights && (status == PairStatus::Ok || status == PairStatus::Degenerate)) {
      const D3 pen = overshoot(trace.proj, ext);
      if (pen.v > 0.0) {
        std::array<double, 3> d;
        for (int s = 0; s < 3; ++s) d[s] = key.out_weight * pen.d[s];
        entries.push_back({-1, vars, d});
      }
    }
  }
  void merge_into(DeferredSink& total) const {
    ValueSink::merge_into(total);
    total.entries.insert(total.entries.end(), entries.begin(), entries.end());
  }
};

int chunk_count(const RenderOptions& options, std::size_t triangles) {
  const int want = options.deterministic ? 16 : std::max(options.threads, 1);
  return static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(want, triangles)));
}

template <Mode M, typename Sink>
void run_pairs(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
               const RenderOptions& options, std::vector<Sink>& sinks) {
  using T = ScalarOf<M>;
  using F = FrontOf<M>;
  lens.validate();
  if (!(plane.z > value_of(*std::max_element(lens.heights.begin(), lens.heights.end()))))
    throw GeometryError("receiving plane must lie behind the lens");

  const double eta = lens.refractive_index;
  const Rect ext = plane.extent();
  const int chunks = static_cast<int>(sinks.size());
  const std::size_t ntri = lens.num_triangles();
  const std::size_t nvert = lens.num_vertices();
  const double total_q = sources.total_intensity();
  std::vector<Vec3T<F>> front(nvert);

  for (std::size_t k = 0; k < sources.count(); ++k) {
    const Emitter& e = sources.emitters[k];
    Vec3T<F> src_front;
    Vec3T<T> src;
    T q;
    if constexpr (M == Mode::Sources) {
      src = {D3::variable(e.x, 0), D3::variable(e.y, 1), D3(0.0)};
      q = D3::variable(e.q, 2);
      src_front = src;
    } else {
      src = {T(e.x), T(e.y), T(0.0)};
      q = T(e.q);
      src_front = {F(e.x), F(e.y), F(0.0)};
    }

    parallel_for(chunks, options.threads, [&](int c) {
      const std::size_t begin = nvert * c / chunks, end = nvert * (c + 1) / chunks;
      for (std::size_t v = begin; v < end; ++v) {
        const int vi = static_cast<int>(v);
        Vec3T<F> back{F(lens.vertex_x(vi)), F(lens.vertex_y(vi)), F(lens.heights[v])};
        if constexpr (M == Mode::Heights) back.z = D1::variable(lens.heights[v], 0);
        front[v] = incident_point(src_front, back, lens.front_z, eta);
      }
    });

    const double out_weight = total_q > 0 ? e.q / total_q : 0.0;
    parallel_for(chunks, options.threads, [&](int c) {
      Sink& sink = sinks[c];
      const std::size_t begin = ntri * c / chunks, end = ntri * (c + 1) / chunks;
      std::array<Vec3T<T>, 3> back, fr;
      for (std::size_t t = begin; t < end; ++t) {
        const auto& tri = lens.triangles[t];
        for (int j = 0; j < 3; ++j) {
          const int vi = tri[j];
          back[j] = {T(lens.vertex_x(vi)), T(lens.vertex_y(vi)), T(lens.heights[vi])};
          if constexpr (M == Mode::Heights) {
            back[j].z = D3::variable(lens.heights[vi], j);
            const auto lift = [j](const D1& x) {
              D3 r(x.v);
              r.d[j] = x.d[0];
              return r;
            };
            const auto& f = front[vi];
            fr[j] = {lift(f.x), lift(f.y), lift(f.z)};
          } else {
            fr[j] = front[vi];
          }
        }
        const PairKey key{static_cast<int>(k), tri, out_weight};
        sink.begin(key);
        PairTrace<T> trace;
        const PairStatus status = trace_pair(src, q, back, fr, eta, plane.z, trace);
        if (status == PairStatus::Ok)
          allocate(trace.proj, trace.flux, plane, [&](int pixel, const T& contrib) { sink.add(pixel, contrib); });
        sink.finish(key, status, trace, ext);
      }
    });
  }
}

template <typename Sink>
Sink merge(std::vector<Sink>& sinks, Sink total) {
  for (const auto& s : sinks) s.merge_into(total);
  return total;
}

}  // namespace

RenderResult render(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                    const RenderOptions& options) {
  std::vector<ValueSink> sinks(chunk_count(options, lens.num_triangles()), ValueSink(plane));
  run_pairs<Mode::Value>(sources, lens, plane, options, sinks);
  ValueSink total = merge(sinks, ValueSink(plane));
  return {std::move(total.image), total.out, total.diag};
}

FluxImage render_flux(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                      const RenderOptions& options) {
  return render(sources, lens, plane, options).flux;
}

FluxWithGrads render_flux_with_grads(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                                     Wrt wrt, const RenderOptions& options) {
  const std::size_t nvars = variable_count(wrt, sources, lens);
  const int chunks = chunk_count(options, lens.num_triangles());
  auto run = [&]<Mode M>() {
    std::vector<JacobianSink<M>> sinks(chunks, JacobianSink<M>(plane, nvars));
    run_pairs<M>(sources, lens, plane, options, sinks);
    JacobianSink<M> total = merge(sinks, JacobianSink<M>(plane, nvars));
    return FluxWithGrads{std::move(total.image), std::move(total.jac), total.diag};
  };
  return wrt == Wrt::Heights ? run.template operator()<Mode::Heights>() : run.template operator()<Mode::Sources>();
}

AdjointResult render_adjoint(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                             const AdjointRequest& request, const RenderOptions& options) {
  if (request.pixel_weights.size() != static_cast<std::size_t>(plane.num_pixels()))
    throw ConfigError("render_adjoint: one weight per pixel required");
  if (request.wrt == Wrt::SourceParams && request.out_weight != 0.0)
    throw ConfigError("render_adjoint: the out-of-image penalty is only differentiated w.r.t. heights");
  const std::size_t nvars = variable_count(request.wrt, sources, lens);
  const int chunks = chunk_count(options, lens.num_triangles());
  auto run = [&]<Mode M>() {
    AdjointSink<M> proto(plane, request.pixel_weights, request.out_weight, nvars);
    std::vector<AdjointSink<M>> sinks(chunks, proto);
    run_pairs<M>(sources, lens, plane, options, sinks);
    AdjointSink<M> total = merge(sinks, proto);
    return AdjointResult{std::move(total.image), total.out, std::move(total.grad), total.diag};
  };
  return request.wrt == Wrt::Heights ? run.template operator()<Mode::Heights>()
                                     : run.template operator()<Mode::Sources>();
}

DeferredAdjoint render_deferred(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                                Wrt wrt, const RenderOptions& options) {
  const std::size_t nvars = variable_count(wrt, sources, lens);
  const int chunks = chunk_count(options, lens.num_triangles());
  auto run = [&]<Mode M>() {
    std::vector<DeferredSink<M>> sinks(chunks, DeferredSink<M>(plane));
    run_pairs<M>(sources, lens, plane, options, sinks);
    DeferredSink<M> total(plane);
    std::size_t n = 0;
    for (const auto& s : sinks) n += s.entries.size();
    total.entries.reserve(n);
    total = merge(sinks, std::move(total));
    return DeferredAdjoint{std::move(total.image), total.out, total.diag, nvars, std::move(total.entries)};
  };
  return wrt == Wrt::Heights ? run.template operator()<Mode::Heights>() : run.template operator()<Mode::Sources>();
}

std::vector<double> DeferredAdjoint::contract(std::span<const double> pixel_weights, double out_weight) const {
  if (pixel_weights.size() != flux.size()) throw ConfigError("contract: one weight per pixel required");
  std::vector<double> grad(variables, 0.0);
  for (const Entry& e : entries) {
    const double w = e.pixel >= 0 ? pixel_weights[e.pixel] : out_weight;
    if (w == 0.0) continue;
    for (int s = 0; s < 3; ++s) grad[e.variables[s]] += w * e.partials[s];
  }
  return grad;
}

}  // namespace caustic
