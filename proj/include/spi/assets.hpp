#pragma once

// Procedural test scenes. Both are 64x64 and span the full 0..255 range.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "spi/grid.hpp"

namespace spi::assets {

inline constexpr std::size_t kSide = 64;

/// Block letter "N" in white on black: two 9-pixel bars joined by a
/// diagonal that shifts one column every 1.5 rows.
inline Image glyph64() {
  Image img(kSide, kSide, 0.0);
  for (std::size_t r = 7; r < 57; ++r) {
    for (std::size_t c = 11; c < 20; ++c) img(r, c) = 255.0;
    for (std::size_t c = 43; c < 52; ++c) img(r, c) = 255.0;
    const auto left = 11 + static_cast<std::size_t>(std::lround(static_cast<double>(r - 7) * 32.0 / 49.0));
    for (std::size_t c = left; c < left + 9; ++c) img(r, c) = 255.0;
  }
  return img;
}

/// Horizontal ramp with a bright disk and a dark square on top.
inline Image composite64() {
  Image img(kSide, kSide, 0.0);
  for (std::size_t r = 0; r < kSide; ++r) {
    for (std::size_t c = 0; c < kSide; ++c) {
      double v = 4.0 * static_cast<double>(c) + 2.0;
      const double dr = static_cast<double>(r) - 20.0;
      const double dc = static_cast<double>(c) - 22.0;
      if (dr * dr + dc * dc <= 14.0 * 14.0) v = 255.0;
      if (r >= 38 && r < 56 && c >= 34 && c < 56) v = 0.0;
      if (r >= 44 && r < 50 && c >= 6 && c < 28) v = 128.0;
      img(r, c) = v;
    }
  }
  return img;
}

inline constexpr std::string_view kBuiltinPrefix = "builtin:";

/// Resolves "builtin:glyph64" / "builtin:composite64".
inline std::optional<Image> builtin(std::string_view name) {
  if (name.substr(0, kBuiltinPrefix.size()) != kBuiltinPrefix) return std::nullopt;
  const auto id = name.substr(kBuiltinPrefix.size());
  if (id == "glyph64") return glyph64();
  if (id == "composite64") return composite64();
  return std::nullopt;
}

}  // namespace spi::assets
