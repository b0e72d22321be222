#include "spi/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spi/assets.hpp"

namespace spi {
namespace {

// SSIM from raw moments E[x^2] - E[x]^2 with a separable Gaussian window.
double reference_mssim(const Image& x, const Image& y) {
  const int w = 11;
  std::vector<double> g(w);
  double total = 0.0;
  for (int i = 0; i < w; ++i) {
    g[i] = std::exp(-((i - 5) * (i - 5)) / (2.0 * 1.5 * 1.5));
    total += g[i];
  }
  for (auto& v : g) v /= total;
  const double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
  double sum = 0.0;
  int count = 0;
  for (std::size_t r0 = 0; r0 + w <= x.rows(); ++r0) {
    for (std::size_t c0 = 0; c0 + w <= x.cols(); ++c0) {
      double ex = 0, ey = 0, exx = 0, eyy = 0, exy = 0;
      for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
          const double k = g[i] * g[j];
          const double a = x(r0 + i, c0 + j), b = y(r0 + i, c0 + j);
          ex += k * a;
          ey += k * b;
          exx += k * a * a;
          eyy += k * b * b;
          exy += k * a * b;
        }
      }
      const double vx = exx - ex * ex, vy = eyy - ey * ey, cxy = exy - ex * ey;
      sum += (2 * ex * ey + c1) * (2 * cxy + c2) / ((ex * ex + ey * ey + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return sum / count;
}

Image add_noise(const Image& img, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  Image out = img;
  for (auto& v : out.values()) v += dist(rng);
  return out;
}

TEST(Mse, Basics) {
  const auto a = oracle::random_integer_image(16, 1);
  EXPECT_EQ(mse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(mse(Image(4, 4, 0.0), Image(4, 4, 255.0)), 255.0 * 255.0);
  EXPECT_THROW(mse(Image(4, 4), Image(4, 8)), std::invalid_argument);
}

TEST(Mse, MatchesDoubleLoop) {
  const auto a = oracle::random_integer_image(16, 2);
  const auto b = oracle::random_integer_image(16, 3);
  double acc = 0.0;
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 16; ++c) acc += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
  EXPECT_NEAR(mse(a, b), acc / 256.0, 1e-9);
  EXPECT_EQ(mse(a, b), mse(b, a));
}

TEST(Psnr, Values) {
  EXPECT_DOUBLE_EQ(psnr_from_mse(255.0 * 255.0), 0.0);
  EXPECT_NEAR(psnr_from_mse(1.0), 10.0 * std::log10(65025.0), 1e-12);
  EXPECT_NEAR(psnr_from_mse(1.0), 48.13, 0.01);
  const auto a = oracle::random_integer_image(16, 4);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_GT(psnr(a, a), 0.0);
}

TEST(Psnr, DecreasesWithMse) {
  double previous = psnr_from_mse(1e-6);
  for (double e : {1e-3, 0.5, 1.0, 10.0, 1000.0, 65025.0}) {
    EXPECT_LT(psnr_from_mse(e), previous);
    previous = psnr_from_mse(e);
  }
}

TEST(Psnr, Symmetric) {
  const auto a = oracle::random_integer_image(16, 5);
  const auto b = oracle::random_integer_image(16, 6);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
}

TEST(Mssim, IdenticalIsExactlyOne) {
  for (const auto& img : {assets::glyph64(), assets::composite64(), oracle::random_integer_image(32, 7)}) {
    EXPECT_EQ(mssim(img, img), 1.0);
  }
}

TEST(Mssim, MatchesRawMomentOracle) {
  const auto a = assets::composite64();
  const auto b = add_noise(a, 20.0, 8);
  EXPECT_NEAR(mssim(a, b), reference_mssim(a, b), 1e-9);
  const auto c = oracle::random_integer_image(24, 9);
  const auto d = oracle::random_integer_image(24, 10);
  EXPECT_NEAR(mssim(c, d), reference_mssim(c, d), 1e-9);
}

TEST(Mssim, OffsetLowersScoreButKeepsItPositive) {
  const auto a = assets::composite64();
  Image shifted = a;
  for (auto& v : shifted.values()) v += 25.0;
  const double s = mssim(a, shifted);
  EXPECT_LT(s, 1.0);
  EXPECT_GT(s, 0.0);
}

TEST(Mssim, InversionScoresBelowNoiseOfEqualMse) {
  const auto a = assets::composite64();
  Image inverted = a;
  for (auto& v : inverted.values()) v = 255.0 - v;
  const double target = mse(a, inverted);
  auto noisy = add_noise(a, 1.0, 11);
  // Scale the noise so both distortions have the same MSE.
  const double scale = std::sqrt(target / mse(a, noisy));
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy.values()[i] = a.values()[i] + scale * (noisy.values()[i] - a.values()[i]);
  ASSERT_NEAR(mse(a, noisy), target, 1e-6 * target);
  EXPECT_LT(mssim(a, inverted), mssim(a, noisy));
}

TEST(Mssim, Symmetric) {
  const auto a = assets::composite64();
  const auto b = add_noise(a, 15.0, 12);
  EXPECT_NEAR(mssim(a, b), mssim(b, a), 1e-12);
}

TEST(Mssim, ContrastStructureIgnoresCommonOffset) {
  const auto a = assets::composite64();
  const auto b = add_noise(a, 15.0, 13);
  Image a2 = a, b2 = b;
  for (auto& v : a2.values()) v += 40.0;
  for (auto& v : b2.values()) v += 40.0;
  EXPECT_NEAR(ssim_means(a, b).contrast_structure, ssim_means(a2, b2).contrast_structure, 1e-12);
  EXPECT_EQ(mssim(a2, a2), 1.0);
}

TEST(Mssim, RejectsSmallOrMismatchedImages) {
  EXPECT_THROW(mssim(Image(10, 10), Image(10, 10)), std::invalid_argument);
  EXPECT_THROW(mssim(Image(16, 16), Image(16, 32)), std::invalid_argument);
}

TEST(Quality, Report) {
  const auto a = assets::glyph64();
  const auto b = add_noise(a, 10.0, 14);
  const auto q = evaluate_quality(a, b);
  EXPECT_EQ(q.mse, mse(a, b));
  EXPECT_EQ(q.psnr_db, psnr(a, b));
  EXPECT_EQ(q.mssim, mssim(a, b));
  EXPECT_LE(q.mssim, 1.0);
}

}  // namespace
}  // namespace spi
