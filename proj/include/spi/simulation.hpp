#pragma once

// Single-pixel acquisition: subsampled Hadamard measurement, complementary
// 0/1 modulation, optical attenuation and additive detector noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spi/grid.hpp"
#include "spi/hadamard_operator.hpp"
#include "spi/orderings.hpp"
#include "spi/selection_history.hpp"

namespace spi {

enum class MeasurementMode { direct, complementary_differential };
enum class NoiseModel { none, gaussian, poisson };

inline constexpr std::string_view to_string(MeasurementMode m) noexcept {
  return m == MeasurementMode::direct ? "direct" : "differential";
}

inline std::optional<MeasurementMode> parse_mode(std::string_view s) {
  if (s == "direct") return MeasurementMode::direct;
  if (s == "differential" || s == "complementary_differential") {
    return MeasurementMode::complementary_differential;
  }
  return std::nullopt;
}

inline constexpr std::string_view to_string(NoiseModel m) noexcept {
  switch (m) {
    case NoiseModel::none: return "none";
    case NoiseModel::gaussian: return "gaussian";
    case NoiseModel::poisson: return "poisson";
  }
  return "?";
}

inline std::optional<NoiseModel> parse_noise_model(std::string_view s) {
  if (s == "none") return NoiseModel::none;
  if (s == "gaussian" || s == "normal") return NoiseModel::gaussian;
  if (s == "poisson") return NoiseModel::poisson;
  return std::nullopt;
}

/// M for a sampling ratio over N pixels: round(ratio * N), at least 1.
inline std::size_t samples_for_ratio(double ratio, std::size_t n) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("sampling ratio must be in (0, 1], got " + std::to_string(ratio));
  }
  const auto m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  return std::clamp<std::size_t>(m, 1, n);
}

struct MeasurementPlan {
  std::shared_ptr<const OrderingPermutation> ordering;
  std::size_t sample_count = 0;
  MeasurementMode mode = MeasurementMode::direct;

  std::size_t pixels() const { return ordering ? ordering->size() : 0; }
  double ratio() const {
    return static_cast<double>(sample_count) / static_cast<double>(pixels());
  }

  void validate() const {
    if (!ordering) throw std::invalid_argument("measurement plan has no ordering");
    if (sample_count < 1 || sample_count > ordering->size()) {
      throw std::invalid_argument("sample count " + std::to_string(sample_count) +
                                  " outside [1, " + std::to_string(ordering->size()) + "]");
    }
  }
};

struct NoiseSpec {
  NoiseModel model = NoiseModel::none;
  double snri_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  double od = 0.0;

  void validate() const {
    if (model != NoiseModel::none && !std::isfinite(snri_db)) {
      throw std::invalid_argument("noise model needs a finite SNR_I");
    }
    if (!(od >= 0.0) || !std::isfinite(od)) {
      throw std::invalid_argument("optical density must be finite and >= 0");
    }
  }
};

struct MeasurementSet {
  /// y_r per rank; differential y+ - y- in complementary mode.
  std::vector<double> values;
  /// Interleaved (y+_1, y-_1, y+_2, ...) readings, complementary mode only.
  std::optional<std::vector<double>> raw_pairs;
  MeasurementPlan plan;
  NoiseSpec noise;
};

/// Transmissivity T = 10^-OD.
inline double transmissivity(double od) { return std::pow(10.0, -od); }

/// Noise standard deviation giving SNR_I = 10 log10(mean / sigma).
inline double gaussian_sigma_from_snri(const Image& img, double snri_db) {
  const double m = mean(img);
  if (!(m > 0.0)) throw std::invalid_argument("SNR_I needs a scene with positive mean");
  if (!std::isfinite(snri_db)) throw std::invalid_argument("SNR_I must be finite");
  return m / std::pow(10.0, snri_db / 10.0);
}

/// Additive noise generator drawing from one seeded stream.
class NoiseSource {
 public:
  /// Largest Poisson mean accepted; beyond this the integer draw loses precision.
  static constexpr double kMaxPoissonMean = 1e15;

  NoiseSource(NoiseModel model, double sigma, std::uint64_t seed)
      : model_(model), sigma_(sigma), rng_(seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw std::invalid_argument("noise sigma must be finite and >= 0");
    }
    if (model_ == NoiseModel::poisson) {
      lambda_ = sigma * sigma;
      if (lambda_ > kMaxPoissonMean) {
        throw std::overflow_error("Poisson mean " + std::to_string(lambda_) + " too large");
      }
    }
  }

  double operator()() {
    switch (model_) {
      case NoiseModel::none:
        return 0.0;
      case NoiseModel::gaussian:
        return sigma_ == 0.0 ? 0.0 : sigma_ * normal_(rng_);
      case NoiseModel::poisson: {
        if (lambda_ == 0.0) return 0.0;
        std::poisson_distribution<long long> dist(lambda_);
        return static_cast<double>(dist(rng_)) - lambda_;
      }
    }
    return 0.0;
  }

 private:
  NoiseModel model_;
  double sigma_;
  double lambda_ = 0.0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Centered Poisson noise with variance sigma^2: Poisson(sigma^2) - sigma^2.
inline std::vector<double> poisson_noise(double sigma, std::size_t count, std::uint64_t seed) {
  NoiseSource src(NoiseModel::poisson, sigma, seed);
  std::vector<double> out(count);
  for (auto& v : out) v = src();
  return out;
}

inline std::vector<double> gaussian_noise(double sigma, std::size_t count, std::uint64_t seed) {
  NoiseSource src(NoiseModel::gaussian, sigma, seed);
  std::vector<double> out(count);
  for (auto& v : out) v = src();
  return out;
}

namespace detail {

inline std::vector<double> flatten_checked(const Image& img, const MeasurementPlan& plan) {
  plan.validate();
  const unsigned k = scene_order(img);
  if (k != plan.ordering->order) {
    throw std::invalid_argument("image of order " + std::to_string(k) +
                                " does not match plan order " + std::to_string(plan.ordering->order));
  }
  return img.data();
}

inline double noise_sigma(const Image& img, const NoiseSpec& noise) {
  return noise.model == NoiseModel::none ? 0.0 : gaussian_sigma_from_snri(img, noise.snri_db);
}

}  // namespace detail

/// Noiseless y = A f with A the first M rows of the plan's ordering.
inline std::vector<double> forward_measure(const Image& img, const MeasurementPlan& plan) {
  const auto f = detail::flatten_checked(img, plan);
  return HadamardOperator(plan.ordering, plan.sample_count).forward(f);
}

/// Splits a +1/-1 pattern into the 0/1 pair P+ = (1 + P)/2, P- = (1 - P)/2.
inline std::pair<Grid<std::uint8_t>, Grid<std::uint8_t>> complementary_split(const BasisPattern& p) {
  Grid<std::uint8_t> plus(p.cells.rows(), p.cells.cols());
  Grid<std::uint8_t> minus(p.cells.rows(), p.cells.cols());
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    const int v = p.cells.values()[i];
    plus.values()[i] = static_cast<std::uint8_t>((1 + v) / 2);
    minus.values()[i] = static_cast<std::uint8_t>((1 - v) / 2);
  }
  return {std::move(plus), std::move(minus)};
}

/// Complementary differential acquisition. Each rank yields the readings
/// y+ = T <P+, f> + n and y- = T <P-, f> + n', clamped at zero, and the
/// value y+ - y-. Noise is drawn rank-major, plus before minus, from one
/// stream seeded by noise.seed; sigma follows SNR_I of the unattenuated scene.
inline MeasurementSet measure_complementary(const Image& img, const MeasurementPlan& plan,
                                            const NoiseSpec& noise) {
  if (plan.mode != MeasurementMode::complementary_differential) {
    throw std::invalid_argument("measure_complementary needs a complementary plan");
  }
  noise.validate();
  const auto f = detail::flatten_checked(img, plan);
  const auto coeffs = HadamardOperator(plan.ordering, plan.sample_count).forward(f);
  double total = 0.0;
  for (double v : f) total += v;

  const double t = transmissivity(noise.od);
  NoiseSource src(noise.model, detail::noise_sigma(img, noise), noise.seed);
  MeasurementSet out{std::vector<double>(plan.sample_count), std::vector<double>(2 * plan.sample_count),
                     plan, noise};
  auto& raw = *out.raw_pairs;
  for (std::size_t r = 0; r < plan.sample_count; ++r) {
    double plus = t * ((total + coeffs[r]) / 2.0);
    double minus = t * ((total - coeffs[r]) / 2.0);
    if (noise.model != NoiseModel::none) {
      plus = std::max(0.0, plus + src());
      minus = std::max(0.0, minus + src());
    }
    raw[2 * r] = plus;
    raw[2 * r + 1] = minus;
    out.values[r] = plus - minus;
  }
  return out;
}

/// Acquisition according to plan.mode. Direct mode adds noise straight to
/// the attenuated +1/-1 projections (no clamping).
inline MeasurementSet measure(const Image& img, const MeasurementPlan& plan, const NoiseSpec& noise) {
  if (plan.mode == MeasurementMode::complementary_differential) {
    return measure_complementary(img, plan, noise);
  }
  noise.validate();
  auto values = forward_measure(img, plan);
  const double t = transmissivity(noise.od);
  NoiseSource src(noise.model, detail::noise_sigma(img, noise), noise.seed);
  for (auto& v : values) {
    v *= t;
    if (noise.model != NoiseModel::none) v += src();
  }
  return MeasurementSet{std::move(values), std::nullopt, plan, noise};
}

inline double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("variance needs at least two samples");
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

/// Detection SNR in dB: 10 log10(Var(signal) / Var(noise)); +inf when the
/// noise has zero variance.
inline double dsnr(std::span<const double> signal, std::span<const double> noise) {
  const double vs = sample_variance(signal);
  const double vn = sample_variance(noise);
  if (vn == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(vs / vn);
}

/// Expands each gray pixel into a factor x factor binary superpixel with
/// round(g * factor^2 / 255) lit cells at seeded random positions.
inline Grid<std::uint8_t> dither_expand(const Image& gray, unsigned factor, std::uint64_t seed) {
  if (factor < 1) throw std::invalid_argument("dither factor must be >= 1");
  const std::size_t cells = std::size_t{factor} * factor;
  Grid<std::uint8_t> out(gray.rows() * factor, gray.cols() * factor, 0);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> slots(cells);
  for (std::size_t r = 0; r < gray.rows(); ++r) {
    for (std::size_t c = 0; c < gray.cols(); ++c) {
      const double g = gray(r, c);
      if (!(g >= 0.0 && g <= 255.0)) throw std::invalid_argument("gray value outside [0, 255]");
      const auto lit = static_cast<std::size_t>(std::lround(g * static_cast<double>(cells) / 255.0));
      for (std::size_t i = 0; i < cells; ++i) slots[i] = i;
      // Partial Fisher-Yates: the first `lit` slots are a uniform sample.
      for (std::size_t i = 0; i < lit; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, cells - 1);
        std::swap(slots[i], slots[pick(rng)]);
        out(r * factor + slots[i] / factor, c * factor + slots[i] % factor) = 1;
      }
    }
  }
  return out;
}

}  // namespace spi
