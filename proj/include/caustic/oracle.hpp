#pragma once

// Reference machinery kept independent of the fast paths: a dense emitter
// lattice standing in for a real extended source, a bisection solver for
// the inverse-refraction point, and a Monte Carlo area integrator.

#include <cstdint>
#include <optional>

#include "caustic/fluxrender.hpp"
#include "caustic/geometry.hpp"
#include "caustic/image.hpp"
#include "caustic/sources.hpp"

namespace caustic {

enum class SourceProfile {
  Uniform,        ///< equal intensities
  CenterWeighted  ///< Gaussian falloff, sigma = B/3
};

/// grid_n x grid_n cell-centred emitters over [-B/2, B/2]^2, intensities
/// summing to 1.
PointSourceSet dense_grid_sources(int grid_n, double size, SourceProfile profile = SourceProfile::Uniform);

FluxImage dense_grid_flux(int grid_n, double size, const LensSurface& lens, const ImagePlane& plane,
                          SourceProfile profile = SourceProfile::Uniform, const RenderOptions& options = {});

/// Grayscale dense-grid render. Without `total_brightness` the image is
/// scaled so its brightest pixel maps to 1.
GrayImage dense_grid_render(int grid_n, double size, const LensSurface& lens, const ImagePlane& plane,
                            std::optional<double> total_brightness = std::nullopt,
                            SourceProfile profile = SourceProfile::Uniform, const RenderOptions& options = {});

/// Fraction k of the way from `source` to `back_vertex` (laterally) at which
/// the refracted ray crosses the front plane, found by bisecting
/// sin(theta_in) - eta sin(theta_lens) on [0, 1]. Axial rays return the
/// paraxial value. Throws GeometryError if the endpoint signs do not differ.
double snell_bisection(const Vec3& source, const Vec3& back_vertex, double front_z, double eta);

struct AreaEstimate {
  double area = 0;
  double std_error = 0;
};

/// Area of tri ∩ rect from uniform samples over rect.
AreaEstimate montecarlo_clip_area(const Triangle2D& tri, const Rect& rect, std::int64_t samples,
                                  std::uint64_t seed = 1);

}  // namespace caustic
