#pragma once

// Row orderings of the Hadamard basis. Each ordering is a permutation that
// maps a 1-based display rank to a 1-based natural-order serial. All of them
// are built from selection-history arithmetic on the serial bits; no matrix
// is ever formed.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spi/selection_history.hpp"

namespace spi {

enum class Scheme { NA, SE, RD, OR, CC, WH };

inline constexpr std::array<Scheme, 6> kAllSchemes = {Scheme::NA, Scheme::SE, Scheme::RD,
                                                      Scheme::OR, Scheme::CC, Scheme::WH};

inline constexpr std::string_view to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::NA: return "NA";
    case Scheme::SE: return "SE";
    case Scheme::RD: return "RD";
    case Scheme::OR: return "OR";
    case Scheme::CC: return "CC";
    case Scheme::WH: return "WH";
  }
  return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  for (auto s : kAllSchemes) {
    const auto ref = to_string(s);
    if (ref.size() == name.size() &&
        std::equal(ref.begin(), ref.end(), name.begin(),
                   [](char a, char b) { return a == std::toupper(static_cast<unsigned char>(b)); })) {
      return s;
    }
  }
  return std::nullopt;
}

/// Schemes defined through 2D domain counts or row/column halves need even k.
constexpr bool needs_square(Scheme s) noexcept { return s != Scheme::NA && s != Scheme::SE; }

struct OrderingPermutation {
  Scheme scheme = Scheme::NA;
  unsigned order = 0;
  /// ranks[r - 1] is the natural serial shown at rank r.
  std::vector<std::uint32_t> ranks;

  std::size_t size() const noexcept { return ranks.size(); }
  std::uint32_t serial_at(std::size_t rank) const { return ranks.at(rank - 1); }
};

inline bool permutation_is_valid(const OrderingPermutation& p) {
  if (p.order == 0 || p.order > kMaxOrder) return false;
  const std::size_t n = std::size_t{1} << p.order;
  if (p.ranks.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto s : p.ranks) {
    if (s < 1 || s > n || seen[s - 1]) return false;
    seen[s - 1] = true;
  }
  return true;
}

/// Serial -> rank (both 1-based).
inline std::vector<std::uint32_t> inverse_ranks(const OrderingPermutation& p) {
  std::vector<std::uint32_t> inv(p.ranks.size());
  for (std::size_t r = 0; r < p.ranks.size(); ++r) inv[p.ranks[r] - 1] = static_cast<std::uint32_t>(r + 1);
  return inv;
}

namespace detail {

// Orderings are at most 2^24 long in practice; 32-bit indices halve memory.
inline void check_ordering_order(unsigned k, bool square) {
  if (k == 0 || k > 30) {
    throw std::invalid_argument("ordering order k must be in [1, 30], got " + std::to_string(k));
  }
  if (square) check_even_order(k);
}

inline OrderingPermutation from_indices(Scheme scheme, unsigned k,
                                        const std::vector<std::uint32_t>& indices) {
  OrderingPermutation p{scheme, k, std::vector<std::uint32_t>(indices.size())};
  for (std::size_t r = 0; r < indices.size(); ++r) p.ranks[r] = indices[r] + 1;
  return p;
}

// Stable sort of natural indices by domain count, ties by index.
inline void sort_by_domains(std::vector<std::uint32_t>::iterator first,
                            std::vector<std::uint32_t>::iterator last, unsigned k) {
  std::sort(first, last, [k](std::uint32_t a, std::uint32_t b) {
    const auto ca = domains_from_index(a, k);
    const auto cb = domains_from_index(b, k);
    return ca != cb ? ca < cb : a < b;
  });
}

// Russian dolls over 0-based indices of order k (even, may be 0).
inline std::vector<std::uint32_t> russian_dolls_indices(unsigned k) {
  if (k == 0) return {0};
  const auto inner = russian_dolls_indices(k - 2);
  const unsigned inner_half = (k - 2) / 2;
  const unsigned half = k / 2;
  const std::uint32_t inner_mask = static_cast<std::uint32_t>(low_mask(inner_half));
  // Prepending a fold to each half stretches the pattern by 2 in that axis.
  auto stretch = [&](std::uint32_t idx, std::uint32_t row_neg, std::uint32_t col_neg) {
    const std::uint32_t row = ((idx & inner_mask) << 1) | row_neg;
    const std::uint32_t col = ((idx >> inner_half) << 1) | col_neg;
    return row | (col << half);
  };
  const std::size_t quarter = inner.size();
  std::vector<std::uint32_t> out;
  out.reserve(4 * quarter);
  constexpr std::array<std::pair<std::uint32_t, std::uint32_t>, 4> prefixes = {
      {{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  for (std::size_t q = 0; q < 4; ++q) {
    for (auto idx : inner) out.push_back(stretch(idx, prefixes[q].first, prefixes[q].second));
    if (q > 0) sort_by_domains(out.end() - static_cast<std::ptrdiff_t>(quarter), out.end(), k);
  }
  return out;
}

}  // namespace detail

inline OrderingPermutation natural_order(unsigned k) {
  detail::check_ordering_order(k, false);
  OrderingPermutation p{Scheme::NA, k, std::vector<std::uint32_t>(std::size_t{1} << k)};
  for (std::size_t r = 0; r < p.ranks.size(); ++r) p.ranks[r] = static_cast<std::uint32_t>(r + 1);
  return p;
}

/// Rows by increasing number of sign changes. The sign-change counts of the
/// N rows are exactly 0..N-1, so the row at rank r has r - 1 changes.
inline OrderingPermutation sequency_order(unsigned k) {
  detail::check_ordering_order(k, false);
  const std::size_t n = std::size_t{1} << k;
  OrderingPermutation p{Scheme::SE, k, std::vector<std::uint32_t>(n, 0)};
  for (std::size_t idx = 0; idx < n; ++idx) {
    const auto changes = detail::runs_from_bits(idx, k) - 1;
    if (p.ranks[changes] != 0) throw std::logic_error("sign-change spectrum is not a bijection");
    p.ranks[changes] = static_cast<std::uint32_t>(idx + 1);
  }
  return p;
}

/// Rows by increasing 2D connected-domain count, ties by natural serial.
inline OrderingPermutation cake_cutting_order(unsigned k) {
  detail::check_ordering_order(k, true);
  const std::size_t n = std::size_t{1} << k;
  // Sort (count, index) keys; keeps the comparator free of recomputation.
  std::vector<std::uint64_t> keys(n);
  const unsigned index_bits = k;
  for (std::size_t idx = 0; idx < n; ++idx) {
    keys[idx] = (detail::domains_from_index(idx, k) << index_bits) | idx;
  }
  std::sort(keys.begin(), keys.end());
  OrderingPermutation p{Scheme::CC, k, std::vector<std::uint32_t>(n)};
  const std::uint64_t mask = detail::low_mask(index_bits);
  for (std::size_t r = 0; r < n; ++r) p.ranks[r] = static_cast<std::uint32_t>((keys[r] & mask) + 1);
  return p;
}

namespace detail {

// Natural bit position feeding each weight bit, most significant first:
// row fold 1, column fold 1, row fold 2, column fold 2, ...
inline std::vector<unsigned> weight_positions(unsigned k) {
  check_even_order(k);
  const unsigned half = k / 2;
  std::vector<unsigned> pos;
  pos.reserve(k);
  for (unsigned i = 0; i < half; ++i) {
    pos.push_back(i);
    pos.push_back(half + i);
  }
  return pos;
}

inline std::uint64_t weight_key_from_bits(std::uint64_t bits, const std::vector<unsigned>& pos) {
  const unsigned k = static_cast<unsigned>(pos.size());
  std::uint64_t key = 0;
  for (unsigned r = 0; r < k; ++r) key |= ((bits >> pos[r]) & 1u) << (k - 1 - r);
  return key;
}

}  // namespace detail

/// 1-based rank of a pattern in the weight ordering.
inline std::uint64_t weight_key(const SelectionHistory& h) {
  detail::check_even_order(h.order());
  return detail::weight_key_from_bits(h.bits(), detail::weight_positions(h.order())) + 1;
}

inline OrderingPermutation weight_order(unsigned k) {
  detail::check_ordering_order(k, true);
  const auto pos = detail::weight_positions(k);
  const std::size_t n = std::size_t{1} << k;
  OrderingPermutation p{Scheme::WH, k, std::vector<std::uint32_t>(n)};
  for (std::size_t idx = 0; idx < n; ++idx) {
    p.ranks[detail::weight_key_from_bits(idx, pos)] = static_cast<std::uint32_t>(idx + 1);
  }
  return p;
}

/// Four quarters built from RD(k-2): quarter 1 is RD(k-2) stretched by two in
/// both axes (order inherited), quarters 2..4 prefix the halves with
/// (+1,-1), (-1,+1), (-1,-1) and are each sorted by domain count.
inline OrderingPermutation russian_dolls_order(unsigned k) {
  detail::check_ordering_order(k, true);
  return detail::from_indices(Scheme::RD, k, detail::russian_dolls_indices(k));
}

/// N/4 groups of four. Each pattern of the order k-2 list spawns four
/// children by one more fold at the outer end of each half; siblings are
/// sorted by domain count and groups follow parent order.
inline OrderingPermutation origami_order(unsigned k) {
  detail::check_ordering_order(k, true);
  // Level 2: [1;1], [1;-1], [-1;1], [-1;-1].
  std::vector<std::uint32_t> level = {0b00, 0b10, 0b01, 0b11};
  for (unsigned half = 1; 2 * half < k; ++half) {
    const std::uint32_t mask = static_cast<std::uint32_t>(detail::low_mask(half));
    const unsigned child_k = 2 * half + 2;
    std::vector<std::uint32_t> next;
    next.reserve(level.size() * 4);
    for (auto parent : level) {
      const std::uint32_t row = parent & mask;
      const std::uint32_t col = parent >> half;
      for (std::uint32_t rc = 0; rc < 4; ++rc) {
        const std::uint32_t row_neg = rc >> 1;
        const std::uint32_t col_neg = rc & 1u;
        const std::uint32_t child_row = row | (row_neg << half);
        const std::uint32_t child_col = col | (col_neg << half);
        next.push_back(child_row | (child_col << (half + 1)));
      }
      detail::sort_by_domains(next.end() - 4, next.end(), child_k);
    }
    level = std::move(next);
  }
  return detail::from_indices(Scheme::OR, k, level);
}

inline OrderingPermutation make_ordering(Scheme scheme, unsigned k) {
  switch (scheme) {
    case Scheme::NA: return natural_order(k);
    case Scheme::SE: return sequency_order(k);
    case Scheme::RD: return russian_dolls_order(k);
    case Scheme::OR: return origami_order(k);
    case Scheme::CC: return cake_cutting_order(k);
    case Scheme::WH: return weight_order(k);
  }
  throw std::invalid_argument("unknown scheme");
}

/// Process-wide cache of constructed orderings; safe for concurrent use.
class OrderingCache {
 public:
  std::shared_ptr<const OrderingPermutation> get(Scheme scheme, unsigned k) {
    const auto key = std::make_pair(scheme, k);
    {
      std::shared_lock lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto built = std::make_shared<const OrderingPermutation>(make_ordering(scheme, k));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = entries_.emplace(key, std::move(built));
    return it->second;
  }

  void clear() {
    std::unique_lock lock(mutex_);
    entries_.clear();
  }

  static OrderingCache& global() {
    static OrderingCache cache;
    return cache;
  }

 private:
  std::shared_mutex mutex_;
  std::map<std::pair<Scheme, unsigned>, std::shared_ptr<const OrderingPermutation>> entries_;
};

inline std::shared_ptr<const OrderingPermutation> cached_ordering(Scheme scheme, unsigned k) {
  return OrderingCache::global().get(scheme, k);
}

}  // namespace spi
