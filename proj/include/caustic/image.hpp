#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "caustic/error.hpp"

namespace caustic {

/// Row-major res_w x res_h grid of reals, index v * res_w + u.
struct ImageGrid {
  int res_w = 0;
  int res_h = 0;
  std::vector<double> data;

  ImageGrid() = default;
  ImageGrid(int w, int h, double fill = 0.0) : res_w(w), res_h(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t size() const { return data.size(); }
  double& at(int u, int v) { return data[static_cast<std::size_t>(v) * res_w + u]; }
  double at(int u, int v) const { return data[static_cast<std::size_t>(v) * res_w + u]; }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  bool same_shape(const ImageGrid& o) const { return res_w == o.res_w && res_h == o.res_h; }
  double sum() const;
};

/// Per-pixel flux on the receiving plane plus the flux that landed outside it.
struct FluxImage : ImageGrid {
  using ImageGrid::ImageGrid;
  double escaped = 0.0;

  double total() const { return sum(); }
  FluxImage& operator+=(const FluxImage& o);
};

/// Grayscale values in [0, 1].
struct GrayImage : ImageGrid {
  using ImageGrid::ImageGrid;
};

/// Power-law gamma: flux = gray^exponent.
struct Gamma {
  double exponent = 2.2;

  double forward(double g) const { return std::pow(g, exponent); }
  double inverse(double flux) const { return flux > 0.0 ? std::pow(flux, 1.0 / exponent) : 0.0; }
  /// d inverse / d flux; zero where the inverse is clamped or flux is zero.
  double inverse_slope(double flux) const;
};

/// Sum of gamma(g) over all pixels of a target or reference image.
double total_brightness(const GrayImage& img, const Gamma& gamma = {});

/// g = clamp(gamma^-1(G * flux / sum(flux)), 0, 1). Only in-extent flux
/// enters the sum. Throws ConfigError when the image holds no flux.
GrayImage flux_to_gray(const FluxImage& img, double reference_total_brightness, const Gamma& gamma = {});

FluxImage gray_to_flux(const GrayImage& img, const Gamma& gamma = {});

}  // namespace caustic
