#pragma once

// Image recovery from subsampled Hadamard measurements.
//
// linear_reconstruct: zero-filled adjoint, f = A^T y / N.
//
// tv_reconstruct: isotropic TV minimization under A f = y by an augmented
// Lagrangian with variable splitting w_i = D_i f (TVAL3 family):
//
//   L = sum_i ( |w_i| - nu_i^T (D_i f - w_i) + beta/2 |D_i f - w_i|^2 )
//       - lambda^T (A f - y) + mu/2 |A f - y|^2
//
// Each outer iteration does a closed-form w-step (2D shrinkage), a few
// Barzilai-Borwein gradient steps with Armijo backtracking on the quadratic
// f-subproblem, then multiplier updates. D is the forward difference with
// periodic boundaries. Internally A is scaled to orthonormal rows and the
// image to unit peak so the penalties do not depend on N or on intensity.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spi/grid.hpp"
#include "spi/hadamard_operator.hpp"
#include "spi/simulation.hpp"

namespace spi {

struct SolverConfig {
  double mu = 256.0;   // 2^8, data fidelity
  double beta = 32.0;  // 2^5, splitting penalty
  int outer_max = 120;
  int inner_max = 5;
  double tol = 1e-4;
  bool nonneg = true;

  void validate() const {
    if (!(mu > 0.0) || !(beta > 0.0)) throw std::invalid_argument("mu and beta must be positive");
    if (outer_max < 1 || inner_max < 1) throw std::invalid_argument("iteration limits must be >= 1");
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("tol must be in (0, 1)");
  }
};

struct ReconstructionResult {
  /// Clamped into [0, 255] then stretched affinely onto [0, 255].
  Image image;
  /// Solution in measurement intensity units, before normalization.
  Image raw;
  int outer_iters = 0;
  /// |A f - y| / |y| for the raw solution.
  double final_residual = 0.0;
  std::vector<double> objective_trace;
  /// Relative data residual after each outer iteration (internal scaling).
  std::vector<double> residual_trace;
  double wall_seconds = 0.0;
};

class SolverDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Clamp into [0, 255], then map [min, max] affinely onto [0, 255]. A flat
/// image is only clamped.
inline Image normalize_to_byte_range(const Image& raw) {
  Image out = raw;
  for (auto& v : out.values()) v = std::clamp(v, 0.0, 255.0);
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.data().begin(), out.data().end());
  const double min = *lo;
  const double span = *hi - min;
  if (span <= 1e-12 * std::max(1.0, std::abs(*hi))) return out;
  for (auto& v : out.values()) v = (v - min) * (255.0 / span);
  return out;
}

namespace tv {

/// Forward differences with wraparound. g has 2N entries: x-derivatives
/// (along columns) first, then y-derivatives (along rows).
inline void gradient(std::span<const double> f, std::size_t side, std::span<double> g) {
  const std::size_t n = side * side;
  for (std::size_t r = 0; r < side; ++r) {
    const std::size_t rn = (r + 1) % side;
    for (std::size_t c = 0; c < side; ++c) {
      const std::size_t cn = (c + 1) % side;
      const double v = f[r * side + c];
      g[r * side + c] = f[r * side + cn] - v;
      g[n + r * side + c] = f[rn * side + c] - v;
    }
  }
}

/// D^T g, the adjoint of gradient().
inline void divergence_adjoint(std::span<const double> g, std::size_t side, std::span<double> out) {
  const std::size_t n = side * side;
  for (std::size_t r = 0; r < side; ++r) {
    const std::size_t rp = (r + side - 1) % side;
    for (std::size_t c = 0; c < side; ++c) {
      const std::size_t cp = (c + side - 1) % side;
      const std::size_t i = r * side + c;
      out[i] = (g[r * side + cp] - g[i]) + (g[n + rp * side + c] - g[n + i]);
    }
  }
}

inline double tv_norm(std::span<const double> g) {
  const std::size_t n = g.size() / 2;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::hypot(g[i], g[n + i]);
  return acc;
}

/// 2D shrinkage: argmin_w |w| + 1/(2 t) |w - z|^2 = max(|z| - t, 0) z/|z|.
inline void shrink(double zx, double zy, double t, double& wx, double& wy) {
  const double norm = std::hypot(zx, zy);
  if (norm <= t) {
    wx = wy = 0.0;
    return;
  }
  const double scale = (norm - t) / norm;
  wx = scale * zx;
  wy = scale * zy;
}

/// The smooth f-subproblem of the augmented Lagrangian with w, nu, lambda
/// held fixed:
///   Q(f) = -nu^T (D f - w) + beta/2 |D f - w|^2 - lambda^T (A f - y) + mu/2 |A f - y|^2
/// where A here is the operator scaled by `a_scale`.
class FSubproblem {
 public:
  FSubproblem(const HadamardOperator& op, double a_scale, std::size_t side,
              std::span<const double> y, std::span<const double> w, std::span<const double> nu,
              std::span<const double> lambda, double mu, double beta)
      : op_(op), a_scale_(a_scale), side_(side), y_(y), w_(w), nu_(nu), lambda_(lambda),
        mu_(mu), beta_(beta), grad_(2 * side * side), data_(op.rows()), tmp_(side * side) {}

  double value(std::span<const double> f) {
    tv::gradient(f, side_, grad_);
    apply_a(f);
    double q = 0.0;
    for (std::size_t i = 0; i < grad_.size(); ++i) {
      const double d = grad_[i] - w_[i];
      q += -nu_[i] * d + 0.5 * beta_ * d * d;
    }
    for (std::size_t r = 0; r < data_.size(); ++r) {
      const double d = data_[r] - y_[r];
      q += -lambda_[r] * d + 0.5 * mu_ * d * d;
    }
    return q;
  }

  /// Q(f) and its gradient D^T(beta (D f - w) - nu) + A^T(mu (A f - y) - lambda).
  double value_and_gradient(std::span<const double> f, std::span<double> g) {
    const double q = value(f);
    for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] = beta_ * (grad_[i] - w_[i]) - nu_[i];
    tv::divergence_adjoint(grad_, side_, g);
    for (std::size_t r = 0; r < data_.size(); ++r) data_[r] = mu_ * (data_[r] - y_[r]) - lambda_[r];
    op_.adjoint(data_, tmp_);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += a_scale_ * tmp_[i];
    return q;
  }

 private:
  void apply_a(std::span<const double> f) {
    op_.forward(f, data_, work_);
    for (auto& v : data_) v *= a_scale_;
  }

  const HadamardOperator& op_;
  double a_scale_;
  std::size_t side_;
  std::span<const double> y_, w_, nu_, lambda_;
  double mu_, beta_;
  std::vector<double> grad_, data_, tmp_, work_;
};

}  // namespace tv

/// Isotropic total variation with periodic boundaries.
inline double tv_value(const Image& img) {
  if (img.rows() != img.cols()) throw std::invalid_argument("tv_value needs a square image");
  std::vector<double> g(2 * img.size());
  tv::gradient(img.values(), img.rows(), g);
  return tv::tv_norm(g);
}

namespace detail {

inline double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

inline std::size_t checked_side(const MeasurementSet& m) {
  m.plan.validate();
  if (m.values.size() != m.plan.sample_count) {
    throw std::invalid_argument("measurement count " + std::to_string(m.values.size()) +
                                " does not match plan sample count " +
                                std::to_string(m.plan.sample_count));
  }
  const unsigned k = m.plan.ordering->order;
  if (k % 2 != 0) throw std::invalid_argument("reconstruction needs an even order");
  return std::size_t{1} << (k / 2);
}

inline double relative_residual(const HadamardOperator& op, std::span<const double> f,
                                std::span<const double> y) {
  const auto af = op.forward(f);
  double num = 0.0;
  for (std::size_t r = 0; r < af.size(); ++r) num += (af[r] - y[r]) * (af[r] - y[r]);
  const double den = norm2(y);
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

}  // namespace detail

/// Zero-filled adjoint inversion f = A^T y / N.
inline ReconstructionResult linear_reconstruct(const MeasurementSet& m) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t side = detail::checked_side(m);
  const HadamardOperator op(m.plan.ordering, m.plan.sample_count);
  auto f = op.adjoint(m.values);
  const double n = static_cast<double>(op.cols());
  for (auto& v : f) v /= n;

  ReconstructionResult res;
  res.final_residual = detail::relative_residual(op, f, m.values);
  res.raw = Image(side, side, std::move(f));
  res.image = normalize_to_byte_range(res.raw);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

/// Residual growth is only treated as divergence above this relative level.
inline constexpr double kDivergenceFloor = 1e-2;

inline ReconstructionResult tv_reconstruct(const MeasurementSet& m, const SolverConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  const std::size_t side = detail::checked_side(m);
  const HadamardOperator op(m.plan.ordering, m.plan.sample_count);
  const std::size_t n = op.cols();
  const std::size_t rows = op.rows();
  const double a_scale = 1.0 / std::sqrt(static_cast<double>(n));

  // Start from the adjoint solution; rescale so that it peaks at 1.
  std::vector<double> f = op.adjoint(m.values);
  for (auto& v : f) v /= static_cast<double>(n);
  double peak = 0.0;
  for (double v : f) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? peak : 1.0;
  for (auto& v : f) v /= scale;
  // With A_s = A / sqrt(N): A f_true = y  <=>  A_s (f_true / scale) = y / (sqrt(N) scale).
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) y[r] = m.values[r] * a_scale / scale;
  const double y_norm = detail::norm2(y);

  std::vector<double> w(2 * n, 0.0), nu(2 * n, 0.0), lambda(rows, 0.0);
  std::vector<double> grad(2 * n), g(n), g_prev(n), f_prev(n), f_trial(n), af(rows), work;

  tv::FSubproblem sub(op, a_scale, side, y, w, nu, lambda, cfg.mu, cfg.beta);
  // |D|^2 <= 8 and A_s has orthonormal rows, so this step is always stable.
  const double safe_step = 1.0 / (cfg.mu + 8.0 * cfg.beta);
  double step = safe_step;

  ReconstructionResult res;
  double min_residual = std::numeric_limits<double>::infinity();
  auto data_residual = [&] {
    op.forward(f, af, work);
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      af[r] *= a_scale;
      acc += (af[r] - y[r]) * (af[r] - y[r]);
    }
    return std::sqrt(acc);
  };

  for (int outer = 1; outer <= cfg.outer_max; ++outer) {
    f_prev = f;

    // w-step.
    tv::gradient(f, side, grad);
    const double t = 1.0 / cfg.beta;
    for (std::size_t i = 0; i < n; ++i) {
      tv::shrink(grad[i] - nu[i] / cfg.beta, grad[n + i] - nu[n + i] / cfg.beta, t, w[i], w[n + i]);
    }

    // f-step: BB gradient descent with Armijo backtracking.
    double q = sub.value_and_gradient(f, g);
    for (int inner = 0; inner < cfg.inner_max; ++inner) {
      double gg = 0.0;
      for (double v : g) gg += v * v;
      if (gg == 0.0) break;
      double alpha = step;
      double q_trial = 0.0;
      for (int backtrack = 0; backtrack < 40; ++backtrack) {
        for (std::size_t i = 0; i < n; ++i) f_trial[i] = f[i] - alpha * g[i];
        q_trial = sub.value(f_trial);
        if (q_trial <= q - 1e-4 * alpha * gg) break;
        alpha *= 0.5;
      }
      g_prev = g;
      const double q_new = sub.value_and_gradient(f_trial, g);
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = f_trial[i] - f[i];
        ss += s * s;
        sy += s * (g[i] - g_prev[i]);
      }
      f.swap(f_trial);
      q = q_new;
      step = (sy > 0.0) ? ss / sy : safe_step;
    }
    if (cfg.nonneg) {
      for (auto& v : f) v = std::max(v, 0.0);
    }

    // Multiplier updates.
    tv::gradient(f, side, grad);
    for (std::size_t i = 0; i < 2 * n; ++i) nu[i] -= cfg.beta * (grad[i] - w[i]);
    const double res_abs = data_residual();
    for (std::size_t r = 0; r < rows; ++r) lambda[r] -= cfg.mu * (af[r] - y[r]);

    res.objective_trace.push_back(tv::tv_norm(grad) + 0.5 * cfg.mu * res_abs * res_abs);
    res.outer_iters = outer;
    const double residual = y_norm > 0.0 ? res_abs / y_norm : res_abs;
    res.residual_trace.push_back(residual);
    min_residual = std::min(min_residual, residual);
    if (residual > 10.0 * min_residual && residual > kDivergenceFloor) {
      throw SolverDiverged("TV solver diverged at iteration " + std::to_string(outer) +
                           ": residual " + std::to_string(residual) + " vs minimum " +
                           std::to_string(min_residual));
    }

    const double change = [&] {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        num += (f[i] - f_prev[i]) * (f[i] - f_prev[i]);
        den += f_prev[i] * f_prev[i];
      }
      return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }();
    if (change < cfg.tol) break;
  }

  for (auto& v : f) v *= scale;
  res.final_residual = detail::relative_residual(op, f, m.values);
  res.raw = Image(side, side, std::move(f));
  res.image = normalize_to_byte_range(res.raw);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace spi
