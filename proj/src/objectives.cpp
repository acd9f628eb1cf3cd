#include "caustic/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "caustic/curvature.hpp"

namespace caustic {
namespace {

void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* what) {
  if (!a.same_shape(b)) throw ConfigError(std::string(what) + ": image resolution mismatch");
}

/// Adds d(E_grad)/dg to `adj` (scaled by `weight`) and returns E_grad.
double e_grad_accumulate(const GrayImage& g, const GrayImage& t, double weight, std::vector<double>* adj) {
  double e = 0;
  const int w = g.res_w, h = g.res_h;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (u + 1 < w) {
        const double d = (g.at(u + 1, v) - g.at(u, v)) - (t.at(u + 1, v) - t.at(u, v));
        e += d * d;
        if (adj) {
          (*adj)[v * w + u + 1] += weight * 2 * d;
          (*adj)[v * w + u] -= weight * 2 * d;
        }
      }
      if (v + 1 < h) {
        const double d = (g.at(u, v + 1) - g.at(u, v)) - (t.at(u, v + 1) - t.at(u, v));
        e += d * d;
        if (adj) {
          (*adj)[(v + 1) * w + u] += weight * 2 * d;
          (*adj)[v * w + u] -= weight * 2 * d;
        }
      }
    }
  }
  return e;
}

}  // namespace

PixelLoss e_flux_with_weights(const FluxImage& rendered, const GrayImage& reference, const Gamma& gamma) {
  require_same_shape(rendered, reference, "e_flux");
  const double target_total = total_brightness(reference, gamma);
  const double total = rendered.total();
  if (!(total > 0.0)) throw ConfigError("e_flux: rendered image carries no flux");
  const double s = target_total / total;
  PixelLoss out;
  out.flux_weights.resize(rendered.size());
  double coupling = 0;
  for (std::size_t j = 0; j < rendered.size(); ++j) {
    const double r = s * rendered[j] - gamma.forward(reference[j]);
    out.value += r * r;
    out.flux_weights[j] = 2 * s * r;
    coupling += r * rendered[j];
  }
  // The normalization s depends on every pixel through the total.
  const double shared = 2 * s * coupling / total;
  for (double& w : out.flux_weights) w -= shared;
  return out;
}

double e_flux(const FluxImage& rendered, const GrayImage& reference, const Gamma& gamma) {
  return e_flux_with_weights(rendered, reference, gamma).value;
}

double e_img(const GrayImage& rendered, const GrayImage& target) {
  require_same_shape(rendered, target, "e_img");
  double e = 0;
  for (std::size_t j = 0; j < rendered.size(); ++j) e += (rendered[j] - target[j]) * (rendered[j] - target[j]);
  return e;
}

double e_grad(const GrayImage& rendered, const GrayImage& target) {
  require_same_shape(rendered, target, "e_grad");
  return e_grad_accumulate(rendered, target, 0.0, nullptr);
}

double e_out(std::span<const Triangle2D> projected, const Rect& extent) {
  double e = 0;
  for (const auto& tri : projected) {
    for (const auto& p : tri.p) {
      const double dx = p.x - std::clamp(p.x, extent.x0, extent.x1);
      const double dy = p.y - std::clamp(p.y, extent.y0, extent.y1);
      e += dx * dx + dy * dy;
    }
  }
  return e;
}

void SourceFitProblem::validate() const {
  if (references.empty()) throw ConfigError("source fitting needs at least one reference pair");
  for (const auto& r : references) {
    if (r.reference.res_w != plane.res_w || r.reference.res_h != plane.res_h)
      throw ConfigError("reference image resolution does not match the image plane");
    r.lens.validate();
  }
}

double source_fit_flux_error(const PointSourceSet& sources, const SourceFitProblem& problem) {
  double e = 0;
  for (const auto& ref : problem.references)
    e += e_flux(render_flux(sources, ref.lens, problem.plane, problem.render), ref.reference, problem.gamma);
  return e;
}

ObjectiveValue source_fit_objective(std::span<const double> params, const SourceFitProblem& problem) {
  const auto& param = problem.parameterization;
  const PointSourceSet sources = param.decode(params);
  std::vector<Emitter> emitter_grad(sources.count());
  ObjectiveValue out;

  for (const auto& ref : problem.references) {
    const DeferredAdjoint pass = render_deferred(sources, ref.lens, problem.plane, Wrt::SourceParams, problem.render);
    PixelLoss loss = e_flux_with_weights(pass.flux, ref.reference, problem.gamma);
    out.value += problem.weights.flux * loss.value;
    for (double& w : loss.flux_weights) w *= problem.weights.flux;
    const std::vector<double> g = pass.contract(loss.flux_weights);
    for (std::size_t k = 0; k < sources.count(); ++k) {
      emitter_grad[k].x += g[3 * k];
      emitter_grad[k].y += g[3 * k + 1];
      emitter_grad[k].q += g[3 * k + 2];
    }
  }

  if (!param.contraction()) {
    const auto pen = boundary_penalties(sources);
    out.value += problem.weights.position * pen.position + problem.weights.intensity * pen.intensity;
    const auto pg = boundary_penalty_gradient(sources, problem.weights.position, problem.weights.intensity);
    for (std::size_t k = 0; k < sources.count(); ++k) {
      emitter_grad[k].x += pg[k].x;
      emitter_grad[k].y += pg[k].y;
      emitter_grad[k].q += pg[k].q;
    }
  }
  out.gradient = param.pull_back(params, emitter_grad);
  return out;
}

void LensDesignProblem::validate() const {
  if (target.res_w != plane.res_w || target.res_h != plane.res_h)
    throw ConfigError("target resolution does not match the image plane");
  if (sources.count() == 0) throw ConfigError("lens design needs at least one emitter");
  for (double m : {weights.image, weights.gradient, weights.out, weights.smooth})
    if (!(m >= 0)) throw ConfigError("loss weights must be nonnegative");
  lens.validate();
}

GrayImage render_gray(const PointSourceSet& sources, const LensSurface& lens, const ImagePlane& plane,
                      double total_brightness, const Gamma& gamma, const RenderOptions& options) {
  return flux_to_gray(render_flux(sources, lens, plane, options), total_brightness, gamma);
}

ObjectiveValue lens_design_objective(std::span<const double> heights, const LensDesignProblem& problem,
                                     LensDesignTerms* terms) {
  const auto& mu = problem.weights;
  LensSurface lens = problem.lens;
  if (heights.size() != lens.num_vertices()) throw ConfigError("height vector does not match the lens grid");
  lens.heights.assign(heights.begin(), heights.end());

  ObjectiveValue out;
  out.gradient.assign(heights.size(), 0.0);
  const double inf = std::numeric_limits<double>::infinity();

  DeferredAdjoint base;
  try {
    base = render_deferred(problem.sources, lens, problem.plane, Wrt::Heights, problem.render);
  } catch (const GeometryError&) {
    // Heights outside the valid lens shape: report an unusable point so the
    // line search backs off.
    out.value = inf;
    return out;
  }
  const FluxImage& flux = base.flux;
  const double total = flux.total();
  if (!(total > 0.0)) {
    out.value = inf;
    return out;
  }

  const double brightness = total_brightness(problem.target, problem.gamma);
  const double s = brightness / total;
  const std::size_t np = flux.size();
  GrayImage gray(flux.res_w, flux.res_h);
  std::vector<double> slope(np);
  for (std::size_t j = 0; j < np; ++j) {
    const double u = s * flux[j];
    gray[j] = std::clamp(problem.gamma.inverse(u), 0.0, 1.0);
    slope[j] = problem.gamma.inverse_slope(u);
  }

  // dE/dg for the two image-space terms.
  std::vector<double> adj(np, 0.0);
  double img = 0;
  for (std::size_t j = 0; j < np; ++j) {
    const double d = gray[j] - problem.target[j];
    img += d * d;
    adj[j] = mu.image * 2 * d;
  }
  const double grad_term = e_grad_accumulate(gray, problem.target, mu.gradient, &adj);

  // Chain through g = gamma^-1(s * phi), with s = G / sum(phi).
  std::vector<double> weights(np);
  double coupling = 0;
  for (std::size_t j = 0; j < np; ++j) {
    weights[j] = adj[j] * slope[j];
    coupling += weights[j] * flux[j];
  }
  for (std::size_t j = 0; j < np; ++j) weights[j] = s * (weights[j] - coupling / total);

  const std::vector<double> flux_grad = base.contract(weights, mu.out);
  const SmoothnessTerm smooth = e_smooth_with_gradient(lens);

  out.value = mu.image * img + mu.gradient * grad_term + mu.out * base.out_penalty + mu.smooth * smooth.value;
  for (std::size_t v = 0; v < heights.size(); ++v) {
    out.gradient[v] = flux_grad[v] + mu.smooth * smooth.gradient[v];
    if (problem.pin_boundary && lens.is_boundary(static_cast<int>(v))) out.gradient[v] = 0.0;
  }
  if (terms) {
    *terms = {img, grad_term, base.out_penalty, smooth.value, out.value, base.diagnostics};
  }
  return out;
}

}  // namespace caustic
