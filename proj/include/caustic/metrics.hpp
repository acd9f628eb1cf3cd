#pragma once

// Full-reference image metrics on normalized grayscale (C_max = 1).

#include <string>

#include "caustic/image.hpp"

namespace caustic {

/// Mean over pixels of |a - b| / c_max.
double mae(const GrayImage& a, const GrayImage& b, double c_max = 1.0);
double mse(const GrayImage& a, const GrayImage& b);
/// 10 log10(c_max^2 / MSE) in dB; +inf for identical images.
double psnr(const GrayImage& a, const GrayImage& b, double c_max = 1.0);
/// "inf" or the value with two decimals.
std::string format_psnr(double db);

/// Pixel-wise |a - b|.
GrayImage error_map(const GrayImage& a, const GrayImage& b);

/// Copy rounded to 8-bit levels, for metrics in quantized space.
GrayImage quantized8(const GrayImage& img);

}  // namespace caustic
