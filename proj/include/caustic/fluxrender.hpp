#pragma once

// Differentiable flux renderer. For every (emitter, back triangle) pair the
// front-face triangle is recovered by inverse refraction, its solid angle
// times the emitter intensity is the pair's flux, the back-face vertices are
// refracted and projected onto the receiving plane, and the flux is split
// among pixels by exact intersection area.

#include <array>
#include <span>
#include <vector>

#include "caustic/geometry.hpp"
#include "caustic/image.hpp"
#include "caustic/sources.hpp"

namespace caustic {

struct RenderOptions {
  int threads = 1;
  /// Fixed work partition and merge order: results are bit-identical for
  /// any thread count. Otherwise one partition per thread.
  bool deterministic = true;
};

struct RenderDiagnostics {
  long pairs = 0;
  long total_internal_reflection = 0;
  long missed_plane = 0;
  long degenerate = 0;
  double emitted = 0;  ///< sum over pairs of q * solid angle
  double lost = 0;     ///< flux of pairs that never reached the plane

  RenderDiagnostics& operator+=(const RenderDiagnostics& o);
  /// Fraction of pairs lost to total internal reflection.
  double tir_fraction() const { return pairs ? double(total_internal_reflection) / pairs : 0.0; }
};

struct RenderResult {
  FluxImage flux;
  /// Sum over pairs of (q_k / sum q) * squared distance of each projected
  /// vertex to the image rectangle.
  double out_penalty = 0;
  RenderDiagnostics diagnostics;
};

RenderResult render(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                    const RenderOptions& options = {});

FluxImage render_flux(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                      const RenderOptions& options = {});

/// Which variables gradients are taken with respect to.
enum class Wrt {
  SourceParams,  ///< (x_k, y_k, q_k) of every emitter, 3 per emitter
  Heights        ///< every back-surface vertex height
};

inline std::size_t variable_count(Wrt wrt, const PointSourceSet& sources, const LensSurface& lens) {
  return wrt == Wrt::SourceParams ? 3 * sources.count() : lens.num_vertices();
}

/// Dense d(flux_j)/d(variable) for small scenes.
struct FluxJacobian {
  std::size_t pixels = 0;
  std::size_t variables = 0;
  std::vector<double> data;

  double operator()(std::size_t pixel, std::size_t variable) const { return data[pixel * variables + variable]; }
};

struct FluxWithGrads {
  FluxImage flux;
  FluxJacobian jacobian;
  RenderDiagnostics diagnostics;
};

FluxWithGrads render_flux_with_grads(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                                     Wrt wrt, const RenderOptions& options = {});

/// Reverse contraction of the flux Jacobian with per-pixel weights, built
/// by scatter-adding width-3 duals: grad_v = sum_j w_j d(flux_j)/dv, plus
/// out_weight * d(out_penalty)/dv (heights only).
struct AdjointRequest {
  Wrt wrt = Wrt::Heights;
  std::span<const double> pixel_weights;
  double out_weight = 0.0;
};

struct AdjointResult {
  FluxImage flux;
  double out_penalty = 0;
  std::vector<double> gradient;
  RenderDiagnostics diagnostics;
};

AdjointResult render_adjoint(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                             const AdjointRequest& request, const RenderOptions& options = {});

/// One render that keeps the partials of every pixel contribution, for
/// weights that depend on the rendered image itself. contract() gives the
/// same gradient as render_adjoint with those weights, without a second
/// pass over the pairs.
struct DeferredAdjoint {
  struct Entry {
    int pixel;  ///< -1: out-of-image penalty partials (heights only)
    std::array<int, 3> variables;
    std::array<double, 3> partials;
  };

  FluxImage flux;
  double out_penalty = 0;
  RenderDiagnostics diagnostics;
  std::size_t variables = 0;
  std::vector<Entry> entries;

  std::vector<double> contract(std::span<const double> pixel_weights, double out_weight = 0.0) const;
};

DeferredAdjoint render_deferred(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                                Wrt wrt, const RenderOptions& options = {});

}  // namespace caustic
