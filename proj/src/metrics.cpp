#include "caustic/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "caustic/io.hpp"

namespace caustic {
namespace {

void require_same_shape(const GrayImage& a, const GrayImage& b) {
  if (!a.same_shape(b) || a.size() == 0) throw ConfigError("metrics: image sizes differ or are empty");
}

}  // namespace

double mae(const GrayImage& a, const GrayImage& b, double c_max) {
  require_same_shape(a, b);
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]) / c_max;
  return s / a.size();
}

double mse(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a, b);
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s / a.size();
}

double psnr(const GrayImage& a, const GrayImage& b, double c_max) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(c_max * c_max / m);
}

std::string format_psnr(double db) {
  if (std::isinf(db)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", db);
  return buf;
}

GrayImage error_map(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a, b);
  GrayImage out(a.res_w, a.res_h);
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = std::abs(a[j] - b[j]);
  return out;
}

GrayImage quantized8(const GrayImage& img) {
  GrayImage out = img;
  for (double& g : out.data) g = quantize(g, 255) / 255.0;
  return out;
}

}  // namespace caustic
