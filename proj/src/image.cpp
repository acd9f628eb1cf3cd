#include "caustic/image.hpp"

#include <algorithm>
#include <numeric>

namespace caustic {

double ImageGrid::sum() const { return std::accumulate(data.begin(), data.end(), 0.0); }

FluxImage& FluxImage::operator+=(const FluxImage& o) {
  if (!same_shape(o)) throw ConfigError("flux image size mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
  escaped += o.escaped;
  return *this;
}

double Gamma::inverse_slope(double flux) const {
  if (!(flux > 0.0) || flux > 1.0) return 0.0;
  return std::pow(flux, 1.0 / exponent - 1.0) / exponent;
}

double total_brightness(const GrayImage& img, const Gamma& gamma) {
  double total = 0.0;
  for (double g : img.data) total += gamma.forward(g);
  return total;
}

GrayImage flux_to_gray(const FluxImage& img, double reference_total_brightness, const Gamma& gamma) {
  const double total = img.total();
  if (!(total > 0.0)) throw ConfigError("flux_to_gray: image carries no flux");
  GrayImage out(img.res_w, img.res_h);
  const double scale = reference_total_brightness / total;
  for (std::size_t i = 0; i < img.size(); ++i)
    out[i] = std::clamp(gamma.inverse(scale * img[i]), 0.0, 1.0);
  return out;
}

FluxImage gray_to_flux(const GrayImage& img, const Gamma& gamma) {
  FluxImage out(img.res_w, img.res_h);
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = gamma.forward(img[i]);
  return out;
}

}  // namespace caustic
