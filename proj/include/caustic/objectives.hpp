#pragma once

// Loss terms and the two stage objectives: fitting the emitter model to
// reference caustics, and shaping the lens back surface toward a target.

#include <span>
#include <vector>

#include "caustic/fluxrender.hpp"
#include "caustic/geometry.hpp"
#include "caustic/image.hpp"
#include "caustic/sources.hpp"

namespace caustic {

/// A loss value with its derivative with respect to each pixel's flux.
struct PixelLoss {
  double value = 0;
  std::vector<double> flux_weights;
};

/// sum_j (phi_j - gamma(g~_j))^2 where the rendered flux is first scaled so
/// its in-image total equals sum_j gamma(g~_j).
double e_flux(const FluxImage& rendered, const GrayImage& reference, const Gamma& gamma = {});
PixelLoss e_flux_with_weights(const FluxImage& rendered, const GrayImage& reference, const Gamma& gamma = {});

/// sum_j (g_j - g~_j)^2.
double e_img(const GrayImage& rendered, const GrayImage& target);

/// Squared Frobenius distance of forward-difference image gradients (the
/// last column of G_x and last row of G_y are dropped).
double e_grad(const GrayImage& rendered, const GrayImage& target);

/// sum over triangles and vertices of the squared distance to the clamp of
/// the vertex into `extent`.
double e_out(std::span<const Triangle2D> projected, const Rect& extent);

struct ReferencePair {
  LensSurface lens;
  GrayImage reference;
};

struct SourceFitWeights {
  double flux = 1.0;       ///< lambda_1
  double position = 1e3;   ///< lambda_2, only used without contraction
  double intensity = 1e3;  ///< lambda_3, only used without contraction
};

struct SourceFitProblem {
  std::vector<ReferencePair> references;
  ImagePlane plane;
  SourceParameterization parameterization{1.0, Symmetry::None, true};
  SourceFitWeights weights;
  Gamma gamma;
  RenderOptions render;

  void validate() const;
};

struct ObjectiveValue {
  double value = 0;
  std::vector<double> gradient;
};

/// lambda_1 sum_m E_flux^(m) (+ boundary penalties without contraction) and
/// its gradient with respect to the unconstrained parameters.
ObjectiveValue source_fit_objective(std::span<const double> params, const SourceFitProblem& problem);

/// Value only: sum_m E_flux^(m) of a decoded emitter set.
double source_fit_flux_error(const PointSourceSet& sources, const SourceFitProblem& problem);

struct LensDesignWeights {
  double image = 1.0;      ///< mu_1
  double gradient = 0.1;   ///< mu_2
  double out = 1.0;        ///< mu_3
  double smooth = 1e-3;    ///< mu_4
};

struct LensDesignProblem {
  PointSourceSet sources;
  GrayImage target;
  LensSurface lens;  ///< geometry template; its heights are the starting point
  ImagePlane plane;
  LensDesignWeights weights;
  bool pin_boundary = false;
  Gamma gamma;
  RenderOptions render;

  void validate() const;
};

struct LensDesignTerms {
  double image = 0, gradient = 0, out = 0, smooth = 0, total = 0;
  RenderDiagnostics diagnostics;
};

/// mu_1 E_img + mu_2 E_grad + mu_3 E_out + mu_4 E_smooth of the lens with
/// the given heights, and its height gradient. E_out weights each emitter's
/// projected triangles by its share of the total intensity.
ObjectiveValue lens_design_objective(std::span<const double> heights, const LensDesignProblem& problem,
                                     LensDesignTerms* terms = nullptr);

/// Grayscale render used by the design objective.
GrayImage render_gray(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                      double total_brightness, const Gamma& gamma = {}, const RenderOptions& options = {});

}  // namespace caustic
