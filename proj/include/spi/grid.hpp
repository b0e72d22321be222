#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spi {

/// Dense row-major 2D array. Used for scene images, basis patterns and
/// binary modulation masks.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Grid(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw std::invalid_argument("grid data size " + std::to_string(data_.size()) +
                                  " does not match " + std::to_string(rows_) + "x" +
                                  std::to_string(cols_));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;

inline double mean(const Image& img) {
  if (img.empty()) return 0.0;
  return std::accumulate(img.data().begin(), img.data().end(), 0.0) /
         static_cast<double>(img.size());
}

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

constexpr unsigned log2_exact(std::size_t n) noexcept {
  unsigned k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

/// Checks that `img` is a usable scene: square, power-of-two side, finite
/// pixels. Returns the Hadamard order k with N = side^2 = 2^k.
inline unsigned scene_order(const Image& img) {
  if (img.rows() != img.cols() || img.rows() < 2 || !is_power_of_two(img.rows())) {
    throw std::invalid_argument("scene must be square with a power-of-two side, got " +
                                std::to_string(img.rows()) + "x" + std::to_string(img.cols()));
  }
  for (double v : img.values()) {
    if (!std::isfinite(v)) throw std::invalid_argument("scene contains non-finite pixels");
  }
  return 2 * log2_exact(img.rows());
}

}  // namespace spi
