#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spi/grid.hpp"

namespace spi {

namespace detail {
inline void check_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("image shapes differ: " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
  }
}
}  // namespace detail

inline double mse(const Image& ref, const Image& test) {
  detail::check_same_shape(ref, test);
  double acc = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = ref.values()[i] - test.values()[i];
    acc += d * d;
  }
  return ref.empty() ? 0.0 : acc / static_cast<double>(ref.size());
}

/// Peak-255 PSNR in dB; +infinity for identical images.
inline double psnr_from_mse(double err) {
  if (err <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / err);
}

inline double psnr(const Image& ref, const Image& test) { return psnr_from_mse(mse(ref, test)); }

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

struct SsimMeans {
  double ssim = 0.0;
  /// Mean of the contrast-structure factor (2 s_xy + C2) / (s_x^2 + s_y^2 + C2).
  double contrast_structure = 0.0;
};

/// SSIM statistics over every valid placement of a Gaussian window. Window
/// moments are accumulated around the window mean, so the contrast-structure
/// factor is unchanged, up to rounding, when a constant is added to both
/// images. The luminance factor is not: it depends on the absolute means.
inline SsimMeans ssim_means(const Image& ref, const Image& test, const SsimParams& params = {}) {
  detail::check_same_shape(ref, test);
  const auto w = static_cast<std::size_t>(params.window);
  if (params.window < 1 || ref.rows() < w || ref.cols() < w) {
    throw std::invalid_argument("image smaller than the " + std::to_string(params.window) +
                                "x" + std::to_string(params.window) + " SSIM window");
  }
  std::vector<double> kernel(w * w);
  {
    const double center = (static_cast<double>(w) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t r = 0; r < w; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const double dr = static_cast<double>(r) - center;
        const double dc = static_cast<double>(c) - center;
        kernel[r * w + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * params.sigma * params.sigma));
        total += kernel[r * w + c];
      }
    }
    for (auto& v : kernel) v /= total;
  }
  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);

  double sum = 0.0;
  double cs_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r0 = 0; r0 + w <= ref.rows(); ++r0) {
    for (std::size_t c0 = 0; c0 + w <= ref.cols(); ++c0) {
      double mx = 0.0, my = 0.0;
      for (std::size_t r = 0; r < w; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          mx += kernel[r * w + c] * ref(r0 + r, c0 + c);
          my += kernel[r * w + c] * test(r0 + r, c0 + c);
        }
      }
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (std::size_t r = 0; r < w; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          const double dx = ref(r0 + r, c0 + c) - mx;
          const double dy = test(r0 + r, c0 + c) - my;
          const double k = kernel[r * w + c];
          vx += k * dx * dx;
          vy += k * dy * dy;
          cxy += k * dx * dy;
        }
      }
      const double cs = (2.0 * cxy + c2) / (vx + vy + c2);
      sum += (2.0 * mx * my + c1) / (mx * mx + my * my + c1) * cs;
      cs_sum += cs;
      ++count;
    }
  }
  const double n = static_cast<double>(count);
  return SsimMeans{sum / n, cs_sum / n};
}

/// Mean structural similarity; 11x11 Gaussian window, sigma 1.5 by default.
inline double mssim(const Image& ref, const Image& test, const SsimParams& params = {}) {
  return ssim_means(ref, test, params).ssim;
}

struct QualityReport {
  double mse = 0.0;
  double psnr_db = 0.0;
  double mssim = 0.0;
};

inline QualityReport evaluate_quality(const Image& ref, const Image& test, const SsimParams& params = {}) {
  const double e = mse(ref, test);
  return QualityReport{e, psnr_from_mse(e), mssim(ref, test, params)};
}

}  // namespace spi
