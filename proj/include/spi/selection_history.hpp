#pragma once

// Selection-history algebra on the naturally ordered Hadamard matrix.
//
// Row s (1-based) of H_N, N = 2^k, is generated from a single +1 entry by k
// successive folds. Fold b appends either a copy (+1, positive fold) or a
// negated copy (-1, negative fold) of the vector built so far. Fold b is
// negative exactly when bit b of (s - 1) is set, so the history is the
// binary expansion of s - 1 read from the lowest bit.
//
// For a square pattern (k even) the first k/2 folds build the first row of
// the pattern and the last k/2 folds replicate that row downward (row-major
// reshape).

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spi/grid.hpp"

namespace spi {

/// Largest supported order; serial numbers and domain counts stay in 64 bits.
inline constexpr unsigned kMaxOrder = 30;

namespace detail {

inline void check_sign(int v, const char* what) {
  if (v != 1 && v != -1) {
    throw std::invalid_argument(std::string(what) + " must be +1 or -1, got " + std::to_string(v));
  }
}

inline void check_order(unsigned k) {
  if (k == 0 || k > kMaxOrder) {
    throw std::invalid_argument("order k must be in [1, " + std::to_string(kMaxOrder) +
                                "], got " + std::to_string(k));
  }
}

inline void check_even_order(unsigned k) {
  if (k % 2 != 0) {
    throw std::invalid_argument("square patterns need an even order, got k = " +
                                std::to_string(k));
  }
}

inline std::uint64_t low_mask(unsigned bits) noexcept {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

// Number of constant runs in the vector folded from `bits` (bit i set means
// choice i is -1). The seed sign cancels: the junction after fold i is
// sign-preserving iff the choice equals the product of the earlier choices.
inline std::uint64_t runs_from_bits(std::uint64_t bits, unsigned n) noexcept {
  std::uint64_t tau = 1;
  unsigned parity = 0;  // parity of negative choices so far, i.e. running product
  for (unsigned i = 0; i < n; ++i) {
    const unsigned c = static_cast<unsigned>((bits >> i) & 1u);
    tau = (c == parity) ? 2 * tau - 1 : 2 * tau;
    parity ^= c;
  }
  return tau;
}

// 2D domain count of the square pattern for 0-based natural index `index`.
inline std::uint64_t domains_from_index(std::uint64_t index, unsigned k) noexcept {
  const unsigned half = k / 2;
  return runs_from_bits(index & low_mask(half), half) * runs_from_bits(index >> half, half);
}

}  // namespace detail

/// Ordered sequence of +1/-1 fold choices; index 0 is the first fold.
class SelectionHistory {
 public:
  explicit SelectionHistory(std::vector<std::int8_t> values) : values_(std::move(values)) {
    detail::check_order(static_cast<unsigned>(values_.size()));
    for (auto v : values_) detail::check_sign(v, "selection value");
  }

  SelectionHistory(std::initializer_list<int> values) {
    values_.reserve(values.size());
    for (int v : values) {
      detail::check_sign(v, "selection value");
      values_.push_back(static_cast<std::int8_t>(v));
    }
    detail::check_order(static_cast<unsigned>(values_.size()));
  }

  /// History whose choice i is -1 iff bit i of `bits` is set.
  static SelectionHistory from_bits(std::uint64_t bits, unsigned order) {
    detail::check_order(order);
    std::vector<std::int8_t> v(order);
    for (unsigned i = 0; i < order; ++i) v[i] = ((bits >> i) & 1u) ? -1 : 1;
    return SelectionHistory(std::move(v));
  }

  unsigned order() const noexcept { return static_cast<unsigned>(values_.size()); }
  int operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::int8_t> values() const noexcept { return values_; }

  /// Bit i set iff choice i is -1; equals serial - 1.
  std::uint64_t bits() const noexcept {
    std::uint64_t b = 0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] < 0) b |= std::uint64_t{1} << i;
    }
    return b;
  }

  /// First k/2 choices: horizontal folds that build the first pattern row.
  std::span<const std::int8_t> row_half() const {
    detail::check_even_order(order());
    return std::span<const std::int8_t>(values_).first(values_.size() / 2);
  }

  /// Last k/2 choices: vertical folds that replicate the first row downward.
  std::span<const std::int8_t> col_half() const {
    detail::check_even_order(order());
    return std::span<const std::int8_t>(values_).last(values_.size() / 2);
  }

  friend bool operator==(const SelectionHistory&, const SelectionHistory&) = default;

 private:
  std::vector<std::int8_t> values_;
};

/// 1-based row number in the naturally ordered H_{2^k}.
class SerialNumber {
 public:
  SerialNumber(std::uint64_t value, unsigned order) : value_(value), order_(order) {
    detail::check_order(order);
    if (value < 1 || value > (std::uint64_t{1} << order)) {
      throw std::invalid_argument("serial " + std::to_string(value) + " outside [1, 2^" +
                                  std::to_string(order) + "]");
    }
  }

  std::uint64_t value() const noexcept { return value_; }
  unsigned order() const noexcept { return order_; }

  friend bool operator==(const SerialNumber&, const SerialNumber&) = default;

 private:
  std::uint64_t value_;
  unsigned order_;
};

inline SelectionHistory serial_to_history(const SerialNumber& s) {
  return SelectionHistory::from_bits(s.value() - 1, s.order());
}

inline SerialNumber history_to_serial(const SelectionHistory& h) {
  return SerialNumber(h.bits() + 1, h.order());
}

/// Unfolds `seed` through `choices`; the result has 2^len(choices) entries.
inline std::vector<std::int8_t> fold_vector(int seed, std::span<const std::int8_t> choices) {
  detail::check_sign(seed, "seed");
  if (choices.size() > kMaxOrder) throw std::invalid_argument("too many fold choices");
  std::vector<std::int8_t> v;
  v.reserve(std::size_t{1} << choices.size());
  v.push_back(static_cast<std::int8_t>(seed));
  for (auto c : choices) {
    detail::check_sign(c, "fold choice");
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) v.push_back(static_cast<std::int8_t>(c * v[i]));
  }
  return v;
}

inline std::vector<std::int8_t> fold_vector(int seed, std::initializer_list<int> choices) {
  std::vector<std::int8_t> c(choices.begin(), choices.end());
  return fold_vector(seed, std::span<const std::int8_t>(c));
}

/// A Hadamard row reshaped row-major into a square grid of +1/-1 cells.
struct BasisPattern {
  Grid<std::int8_t> cells;
  SerialNumber source;
};

inline BasisPattern history_to_pattern(const SelectionHistory& h) {
  detail::check_even_order(h.order());
  const auto first_row = fold_vector(1, h.row_half());
  const auto first_col = fold_vector(1, h.col_half());
  const std::size_t side = first_row.size();
  Grid<std::int8_t> cells(side, side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      cells(r, c) = static_cast<std::int8_t>(first_col[r] * first_row[c]);
    }
  }
  return BasisPattern{std::move(cells), history_to_serial(h)};
}

/// Incremental count of 1D connected domains (constant runs) while folding.
class RunCounter {
 public:
  RunCounter() = default;
  /// Resumes from a vector with `runs` runs whose fold choices multiply to `product`.
  RunCounter(std::uint64_t runs, int product) : runs_(runs), product_(product) {
    detail::check_sign(product, "running product");
    if (runs == 0) throw std::invalid_argument("run count must be positive");
  }

  void push(int choice) {
    detail::check_sign(choice, "fold choice");
    runs_ = (choice == product_) ? 2 * runs_ - 1 : 2 * runs_;
    product_ *= choice;
  }

  std::uint64_t runs() const noexcept { return runs_; }
  int product() const noexcept { return product_; }

 private:
  std::uint64_t runs_ = 1;
  int product_ = 1;
};

inline std::uint64_t count_1d(int seed, std::span<const std::int8_t> choices) {
  detail::check_sign(seed, "seed");
  RunCounter counter;
  for (auto c : choices) counter.push(c);
  return counter.runs();
}

inline std::uint64_t count_1d(int seed, std::initializer_list<int> choices) {
  std::vector<std::int8_t> c(choices.begin(), choices.end());
  return count_1d(seed, std::span<const std::int8_t>(c));
}

struct DomainCount {
  std::uint64_t rows_1d = 1;
  std::uint64_t cols_1d = 1;
  std::uint64_t total_2d = 1;

  friend bool operator==(const DomainCount&, const DomainCount&) = default;
};

/// 4-connected domain count of the square pattern of `h`, without building it.
inline DomainCount count_2d(const SelectionHistory& h) {
  const auto rows = count_1d(1, h.row_half());
  const auto cols = count_1d(1, h.col_half());
  return DomainCount{rows, cols, rows * cols};
}

inline std::uint64_t sign_changes(const SelectionHistory& h) {
  return count_1d(1, h.values()) - 1;
}

/// Number of 4-connected components of equal-valued cells. Iterative DFS.
template <typename T>
std::size_t count_components(const Grid<T>& grid) {
  const std::size_t rows = grid.rows();
  const std::size_t cols = grid.cols();
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::vector<std::size_t> stack;
  std::size_t components = 0;
  for (std::size_t start = 0; start < grid.size(); ++start) {
    if (seen[start]) continue;
    ++components;
    const T value = grid.values()[start];
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cell = stack.back();
      stack.pop_back();
      const std::size_t r = cell / cols;
      const std::size_t c = cell % cols;
      auto visit = [&](std::size_t rr, std::size_t cc) {
        const std::size_t n = rr * cols + cc;
        if (!seen[n] && grid.values()[n] == value) {
          seen[n] = 1;
          stack.push_back(n);
        }
      };
      if (r > 0) visit(r - 1, c);
      if (r + 1 < rows) visit(r + 1, c);
      if (c > 0) visit(r, c - 1);
      if (c + 1 < cols) visit(r, c + 1);
    }
  }
  return components;
}

inline std::size_t flood_fill_count(const BasisPattern& p) { return count_components(p.cells); }

}  // namespace spi
