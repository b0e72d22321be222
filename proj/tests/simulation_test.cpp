#include "spi/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"

namespace spi {
namespace {

MeasurementPlan plan_for(Scheme s, unsigned k, std::size_t m,
                         MeasurementMode mode = MeasurementMode::complementary_differential) {
  return MeasurementPlan{cached_ordering(s, k), m, mode};
}

Image constant_image(std::size_t side, double v) { return Image(side, side, v); }

TEST(SamplesForRatio, RoundsAndClamps) {
  EXPECT_EQ(samples_for_ratio(0.125, 128 * 128), 2048u);
  EXPECT_EQ(samples_for_ratio(0.05, 4096), 205u);
  EXPECT_EQ(samples_for_ratio(1.0, 64), 64u);
  EXPECT_EQ(samples_for_ratio(1e-9, 64), 1u);
  EXPECT_THROW(samples_for_ratio(0.0, 64), std::invalid_argument);
  EXPECT_THROW(samples_for_ratio(1.5, 64), std::invalid_argument);
}

TEST(ForwardMeasure, EqualsDenseProduct) {
  for (unsigned k = 2; k <= 10; k += 2) {
    const auto h = oracle::dense_hadamard(k);
    const auto img = oracle::random_integer_image(std::size_t{1} << (k / 2), k);
    for (auto s : kAllSchemes) {
      const auto plan = plan_for(s, k, h.size() / 2 + 1);
      EXPECT_EQ(forward_measure(img, plan), oracle::dense_forward(h, plan.ordering->ranks, plan.sample_count, img.data()))
          << to_string(s) << " k=" << k;
    }
  }
}

TEST(ForwardMeasure, EqualsDenseProductAt4096) {
  const auto h = oracle::dense_hadamard(12);
  const auto img = oracle::random_integer_image(64, 12);
  for (auto s : {Scheme::WH, Scheme::CC}) {
    const auto plan = plan_for(s, 12, 512);
    EXPECT_EQ(forward_measure(img, plan), oracle::dense_forward(h, plan.ordering->ranks, 512, img.data()));
  }
}

TEST(ForwardMeasure, RejectsMismatchedImage) {
  const auto plan = plan_for(Scheme::WH, 8, 16);
  EXPECT_THROW(forward_measure(constant_image(8, 1.0), plan), std::invalid_argument);
  EXPECT_THROW(forward_measure(Image(16, 8, 1.0), plan), std::invalid_argument);
  EXPECT_THROW(forward_measure(constant_image(16, 1.0), MeasurementPlan{cached_ordering(Scheme::WH, 8), 0}),
               std::invalid_argument);
}

TEST(ComplementarySplit, AllOnes) {
  const auto [plus, minus] = complementary_split(history_to_pattern(SelectionHistory{1, 1, 1, 1}));
  for (auto v : plus.values()) EXPECT_EQ(v, 1);
  for (auto v : minus.values()) EXPECT_EQ(v, 0);
}

TEST(ComplementarySplit, HalfLitAndRecombines) {
  const auto p = history_to_pattern(SelectionHistory{-1, 1, -1, 1});
  const auto [plus, minus] = complementary_split(p);
  EXPECT_EQ(std::accumulate(plus.data().begin(), plus.data().end(), 0), 8);
  for (std::uint64_t s : {2ull, 77ull, 200ull, 256ull}) {
    const auto q = history_to_pattern(serial_to_history(SerialNumber(s, 8)));
    const auto [qp, qm] = complementary_split(q);
    for (std::size_t i = 0; i < q.cells.size(); ++i) {
      EXPECT_EQ(qp.values()[i] - qm.values()[i], q.cells.values()[i]);
      EXPECT_EQ(qp.values()[i] + qm.values()[i], 1);
    }
  }
}

TEST(MeasureComplementary, NoiselessEqualsForwardMeasure) {
  const auto img = oracle::random_integer_image(32, 3);
  for (auto s : kAllSchemes) {
    const auto plan = plan_for(s, 10, 300);
    const auto m = measure_complementary(img, plan, NoiseSpec{});
    EXPECT_EQ(m.values, forward_measure(img, plan));
    ASSERT_TRUE(m.raw_pairs);
    EXPECT_EQ(m.raw_pairs->size(), 600u);
  }
}

TEST(MeasureComplementary, RequiresComplementaryPlan) {
  const auto plan = plan_for(Scheme::WH, 4, 4, MeasurementMode::direct);
  EXPECT_THROW(measure_complementary(constant_image(4, 1.0), plan, NoiseSpec{}), std::invalid_argument);
}

TEST(MeasureComplementary, OpticalDensityScalesRawPairs) {
  const auto img = oracle::random_integer_image(16, 4);
  const auto plan = plan_for(Scheme::CC, 8, 64);
  const auto clear = measure_complementary(img, plan, NoiseSpec{});
  NoiseSpec od3;
  od3.od = 3.0;
  const auto dim = measure_complementary(img, plan, od3);
  for (std::size_t i = 0; i < clear.raw_pairs->size(); ++i) {
    EXPECT_NEAR((*dim.raw_pairs)[i], 1e-3 * (*clear.raw_pairs)[i], 1e-12 * (*clear.raw_pairs)[i]);
  }
}

TEST(MeasureComplementary, AttenuationComposes) {
  const auto img = oracle::random_integer_image(16, 5);
  const auto plan = plan_for(Scheme::WH, 8, 100);
  NoiseSpec a, ab;
  a.od = 0.7;
  ab.od = 0.7 + 1.9;
  const auto ma = measure(img, plan, a);
  const auto mab = measure(img, plan, ab);
  for (std::size_t i = 0; i < ma.values.size(); ++i) {
    const double composed = ma.values[i] * transmissivity(1.9);
    EXPECT_NEAR(composed, mab.values[i], 1e-12 * std::max(1.0, std::abs(mab.values[i])));
  }
}

TEST(MeasureComplementary, NoiseStreamIsRankMajorPlusFirst) {
  const auto img = oracle::random_integer_image(16, 6);
  const auto plan = plan_for(Scheme::WH, 8, 40);
  const NoiseSpec noise{NoiseModel::gaussian, 10.0, 99, 0.5};
  const auto m = measure_complementary(img, plan, noise);
  const auto clean = measure_complementary(img, plan, NoiseSpec{NoiseModel::none, noise.snri_db, 0, 0.5});
  const auto draws = gaussian_noise(gaussian_sigma_from_snri(img, 10.0), 80, 99);
  for (std::size_t i = 0; i < 80; ++i) {
    EXPECT_DOUBLE_EQ((*m.raw_pairs)[i], std::max(0.0, (*clean.raw_pairs)[i] + draws[i])) << i;
  }
  for (std::size_t r = 0; r < 40; ++r) {
    EXPECT_EQ(m.values[r], (*m.raw_pairs)[2 * r] - (*m.raw_pairs)[2 * r + 1]);
  }
}

TEST(MeasureComplementary, RawReadingsNeverNegative) {
  const auto img = oracle::random_integer_image(16, 7);
  const auto plan = plan_for(Scheme::CC, 8, 256);
  const auto m = measure(img, plan, NoiseSpec{NoiseModel::gaussian, -30.0, 3, 2.0});
  bool clamped = false;
  for (double v : *m.raw_pairs) {
    EXPECT_GE(v, 0.0);
    clamped = clamped || v == 0.0;
  }
  EXPECT_TRUE(clamped);
}

TEST(Measure, SameSeedSameValues) {
  const auto img = oracle::random_integer_image(32, 8);
  const auto plan = plan_for(Scheme::WH, 10, 128);
  for (auto model : {NoiseModel::gaussian, NoiseModel::poisson}) {
    const NoiseSpec noise{model, 15.0, 1234, 0.0};
    const auto a = measure(img, plan, noise);
    const auto b = measure(img, plan, noise);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(*a.raw_pairs, *b.raw_pairs);
    NoiseSpec other = noise;
    other.seed = 1235;
    EXPECT_NE(measure(img, plan, other).values, a.values);
  }
}

TEST(Measure, DirectModeAttenuatesWithoutPairs) {
  const auto img = oracle::random_integer_image(16, 9);
  const auto plan = plan_for(Scheme::SE, 8, 50, MeasurementMode::direct);
  NoiseSpec noise;
  noise.od = 1.0;
  const auto m = measure(img, plan, noise);
  EXPECT_FALSE(m.raw_pairs);
  const auto clean = forward_measure(img, plan);
  for (std::size_t i = 0; i < clean.size(); ++i) EXPECT_DOUBLE_EQ(m.values[i], clean[i] * 0.1);
}

TEST(Measure, RejectsInfiniteSnrWithNoise) {
  const auto plan = plan_for(Scheme::WH, 4, 4);
  EXPECT_THROW(measure(constant_image(4, 1.0), plan, NoiseSpec{NoiseModel::gaussian}), std::invalid_argument);
  NoiseSpec bad;
  bad.od = -1.0;
  EXPECT_THROW(measure(constant_image(4, 1.0), plan, bad), std::invalid_argument);
}

TEST(GaussianSigma, FromSnr) {
  EXPECT_DOUBLE_EQ(gaussian_sigma_from_snri(constant_image(4, 100.0), 10.0), 10.0);
  EXPECT_DOUBLE_EQ(gaussian_sigma_from_snri(constant_image(4, 100.0), 0.0), 100.0);
  EXPECT_THROW(gaussian_sigma_from_snri(constant_image(4, 0.0), 10.0), std::invalid_argument);
}

TEST(GaussianNoise, EmpiricalStd) {
  const auto v = gaussian_noise(10.0, 100000, 42);
  EXPECT_NEAR(std::sqrt(sample_variance(v)), 10.0, 0.2);
}

TEST(PoissonNoise, ZeroSigmaIsSilent) {
  for (double v : poisson_noise(0.0, 1000, 1)) EXPECT_EQ(v, 0.0);
}

TEST(PoissonNoise, VarianceMatchesSigmaSquared) {
  const auto v = poisson_noise(5.0, 100000, 42);
  EXPECT_NEAR(sample_variance(v), 25.0, 0.75);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  EXPECT_NEAR(mean, 0.0, 0.05);
}

TEST(PoissonNoise, Reproducible) {
  EXPECT_EQ(poisson_noise(3.0, 500, 8), poisson_noise(3.0, 500, 8));
  EXPECT_NE(poisson_noise(3.0, 500, 8), poisson_noise(3.0, 500, 9));
}

TEST(PoissonNoise, GuardsHugeMeans) {
  EXPECT_THROW(poisson_noise(1e8, 1, 1), std::overflow_error);
  EXPECT_THROW(poisson_noise(-1.0, 1, 1), std::invalid_argument);
}

TEST(Dsnr, Ratios) {
  const std::vector<double> a = {1, -1, 1, -1};
  const std::vector<double> b = {10, -10, 10, -10};
  EXPECT_DOUBLE_EQ(dsnr(a, a), 0.0);
  EXPECT_DOUBLE_EQ(dsnr(b, a), 20.0);
  EXPECT_TRUE(std::isinf(dsnr(a, std::vector<double>{2, 2, 2})));
  EXPECT_THROW(dsnr(std::vector<double>{1}, a), std::invalid_argument);
}

TEST(Dsnr, FallsWithIlluminationSnr) {
  const auto img = oracle::random_integer_image(32, 10);
  const auto plan = plan_for(Scheme::WH, 10, 256);
  const auto clean = measure(img, plan, NoiseSpec{}).values;
  double previous = std::numeric_limits<double>::infinity();
  for (double snri : {25.0, 15.0, 5.0}) {
    const auto noisy = measure(img, plan, NoiseSpec{NoiseModel::gaussian, snri, 5, 0.0}).values;
    std::vector<double> noise(noisy.size());
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = noisy[i] - clean[i];
    const double d = dsnr(clean, noise);
    EXPECT_TRUE(std::isfinite(d));
    EXPECT_LT(d, previous) << snri;
    previous = d;
  }
}

TEST(Dither, ExtremesAndCounts) {
  Image gray(2, 3);
  const double levels[] = {0, 255, 17, 100, 200, 128};
  for (std::size_t i = 0; i < 6; ++i) gray.values()[i] = levels[i];
  const auto out = dither_expand(gray, 6, 11);
  ASSERT_EQ(out.rows(), 12u);
  ASSERT_EQ(out.cols(), 18u);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      int ones = 0;
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) ones += out(r * 6 + i, c * 6 + j);
      EXPECT_EQ(ones, std::lround(gray(r, c) * 36.0 / 255.0));
    }
  }
  int ones_white = 0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 6; j < 12; ++j) ones_white += out(i, j);
  EXPECT_EQ(ones_white, 36);
}

TEST(Dither, MeanTracksGray) {
  const auto gray = oracle::random_integer_image(16, 12);
  const unsigned f = 4;
  const auto out = dither_expand(gray, f, 3);
  const double lit = std::accumulate(out.data().begin(), out.data().end(), 0.0) / static_cast<double>(out.size());
  EXPECT_NEAR(lit, mean(gray) / 255.0, 1.0 / (f * f));
  EXPECT_EQ(dither_expand(gray, f, 3), out);
}

TEST(Dither, RejectsBadInput) {
  EXPECT_THROW(dither_expand(constant_image(2, 10.0), 0, 1), std::invalid_argument);
  EXPECT_THROW(dither_expand(constant_image(2, 300.0), 2, 1), std::invalid_argument);
}

}  // namespace
}  // namespace spi
