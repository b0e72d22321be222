#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "spi/grid.hpp"

namespace spi {

/// In-place unnormalized Walsh-Hadamard transform in natural order:
/// v <- H_N v with N = v.size(). Applying it twice scales by N.
template <typename T>
void fwht_in_place(std::span<T> v) {
  const std::size_t n = v.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fwht length must be a power of two, got " + std::to_string(n));
  }
  for (std::size_t h = 1; h < n; h *= 2) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const T x = v[j];
        const T y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
}

}  // namespace spi
