#include "spi/selection_history.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace spi {
namespace {

std::vector<int> as_ints(std::span<const std::int8_t> v) { return {v.begin(), v.end()}; }

TEST(SerialToHistory, WorkedValues) {
  EXPECT_EQ(serial_to_history(SerialNumber(6, 4)), (SelectionHistory{-1, 1, -1, 1}));
  EXPECT_EQ(serial_to_history(SerialNumber(4, 8)), (SelectionHistory{-1, -1, 1, 1, 1, 1, 1, 1}));
  EXPECT_EQ(serial_to_history(SerialNumber(75, 8)), (SelectionHistory{1, -1, 1, -1, 1, 1, -1, 1}));
  EXPECT_EQ(serial_to_history(SerialNumber(1, 4)), (SelectionHistory{1, 1, 1, 1}));
}

TEST(SerialToHistory, RejectsBadInput) {
  EXPECT_THROW(SerialNumber(1, 0), std::invalid_argument);
  EXPECT_THROW(SerialNumber(0, 4), std::invalid_argument);
  EXPECT_THROW(SerialNumber(17, 4), std::invalid_argument);
  EXPECT_THROW((SelectionHistory{1, 0, 1}), std::invalid_argument);
  EXPECT_THROW(SelectionHistory(std::vector<std::int8_t>{}), std::invalid_argument);
}

TEST(HistoryToSerial, WorkedValues) {
  EXPECT_EQ(history_to_serial(SelectionHistory{-1, 1, -1, 1}).value(), 6u);
  EXPECT_EQ(history_to_serial(SelectionHistory{1, 1, 1, 1, 1, 1}).value(), 1u);
  EXPECT_EQ(history_to_serial(SelectionHistory{-1, -1, -1, -1}).value(), 16u);
}

TEST(HistoryToSerial, AllNegativeMatchesLastDenseRow) {
  const auto h = oracle::dense_hadamard(4);
  const auto row = fold_vector(1, SelectionHistory{-1, -1, -1, -1}.values());
  EXPECT_EQ(as_ints(row), h[15]);
}

TEST(HistoryToSerial, RoundTripAllOrdersUpTo16) {
  for (unsigned k = 1; k <= 16; ++k) {
    const std::uint64_t n = std::uint64_t{1} << k;
    for (std::uint64_t s = 1; s <= n; ++s) {
      ASSERT_EQ(history_to_serial(serial_to_history(SerialNumber(s, k))).value(), s)
          << "k=" << k << " s=" << s;
    }
  }
}

TEST(FoldVector, Basics) {
  EXPECT_EQ(as_ints(fold_vector(1, {})), std::vector<int>{1});
  EXPECT_EQ(as_ints(fold_vector(1, {-1, 1})), (std::vector<int>{1, -1, 1, -1}));
  EXPECT_EQ(as_ints(fold_vector(1, {1, 1, 1, 1})), std::vector<int>(16, 1));
  EXPECT_EQ(as_ints(fold_vector(-1, {-1})), (std::vector<int>{-1, 1}));
  EXPECT_THROW(fold_vector(0, {1}), std::invalid_argument);
}

TEST(FoldVector, SecondHalfIsChoiceTimesFirstHalf) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int8_t> choices(1 + rng() % 9);
    for (auto& c : choices) c = (rng() & 1) ? 1 : -1;
    const int seed = (rng() & 1) ? 1 : -1;
    const auto v = fold_vector(seed, choices);
    ASSERT_EQ(v.size(), std::size_t{1} << choices.size());
    ASSERT_EQ(v.front(), seed);
    const std::size_t half = v.size() / 2;
    for (std::size_t i = 0; i < half; ++i) ASSERT_EQ(v[half + i], choices.back() * v[i]);
  }
}

TEST(FoldVector, MatchesDenseRowsUpTo4096) {
  for (unsigned k = 1; k <= 12; ++k) {
    const auto h = oracle::dense_hadamard(k);
    for (std::uint64_t s = 1; s <= h.size(); ++s) {
      const auto row = fold_vector(1, serial_to_history(SerialNumber(s, k)).values());
      ASSERT_EQ(as_ints(row), h[s - 1]) << "k=" << k << " s=" << s;
    }
  }
}

TEST(HistoryToPattern, SixthRowOfH16) {
  const auto p = history_to_pattern(SelectionHistory{-1, 1, -1, 1});
  ASSERT_EQ(p.cells.rows(), 4u);
  ASSERT_EQ(p.cells.cols(), 4u);
  const std::vector<int> even = {1, -1, 1, -1};
  const std::vector<int> odd = {-1, 1, -1, 1};
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(p.cells(r, c), (r % 2 == 0 ? even : odd)[c]);
    }
  }
  EXPECT_EQ(p.source.value(), 6u);
}

TEST(HistoryToPattern, AllOnesAndIdenticalRows) {
  const auto ones = history_to_pattern(SelectionHistory{1, 1, 1, 1});
  for (auto v : ones.cells.values()) EXPECT_EQ(v, 1);

  const auto p = history_to_pattern(serial_to_history(SerialNumber(4, 8)));
  ASSERT_EQ(p.cells.rows(), 16u);
  for (std::size_t r = 1; r < 16; ++r) {
    for (std::size_t c = 0; c < 16; ++c) ASSERT_EQ(p.cells(r, c), p.cells(0, c));
  }
}

TEST(HistoryToPattern, RowMajorReshapeOfDenseRow) {
  const auto h = oracle::dense_hadamard(8);
  for (std::uint64_t s = 1; s <= 256; ++s) {
    const auto p = history_to_pattern(serial_to_history(SerialNumber(s, 8)));
    ASSERT_EQ(as_ints(p.cells.values()), h[s - 1]);
  }
}

TEST(HistoryToPattern, OddOrderRejected) {
  EXPECT_THROW(history_to_pattern(SelectionHistory{1, -1, 1}), std::invalid_argument);
  EXPECT_THROW(count_2d(SelectionHistory{1, -1, 1}), std::invalid_argument);
}

// [+,-,-,+] has 3 runs and equal ends; [+,-,+,-] has 4
// runs and unequal ends.
TEST(Count1d, IncrementalUpdateCases) {
  RunCounter equal_ends;
  equal_ends.push(-1);
  equal_ends.push(-1);
  ASSERT_EQ(equal_ends.runs(), 3u);
  {
    auto next = equal_ends;
    next.push(1);
    EXPECT_EQ(next.runs(), 5u);
  }
  {
    auto next = equal_ends;
    next.push(-1);
    EXPECT_EQ(next.runs(), 6u);
  }

  RunCounter unequal_ends;
  unequal_ends.push(-1);
  unequal_ends.push(1);
  ASSERT_EQ(unequal_ends.runs(), 4u);
  {
    auto next = unequal_ends;
    next.push(1);
    EXPECT_EQ(next.runs(), 8u);
  }
  {
    auto next = unequal_ends;
    next.push(-1);
    EXPECT_EQ(next.runs(), 7u);
  }
}

TEST(Count1d, MatchesDirectRunCountForBothSeeds) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::int8_t> choices(rng() % 13);
    for (auto& c : choices) c = (rng() & 1) ? 1 : -1;
    for (int seed : {1, -1}) {
      const auto v = fold_vector(seed, choices);
      std::uint64_t runs = 1;
      for (std::size_t i = 1; i < v.size(); ++i) runs += v[i] != v[i - 1];
      ASSERT_EQ(count_1d(seed, choices), runs);
    }
  }
  EXPECT_EQ(count_1d(1, {1, 1, 1, 1}), 1u);
}

TEST(Count2d, ProductOfRowAndColumnRuns) {
  // Row half [-1,-1,+1] gives 5 runs; column halves with 1 and 2 runs.
  ASSERT_EQ(count_1d(1, {-1, -1, 1}), 5u);
  EXPECT_EQ(count_2d(SelectionHistory{-1, -1, 1, 1, 1, 1}).total_2d, 5u);
  EXPECT_EQ(count_2d(SelectionHistory{-1, -1, 1, 1, 1, -1}).total_2d, 10u);
  EXPECT_EQ(count_2d(SelectionHistory{1, 1, 1, 1}).total_2d, 1u);
  EXPECT_EQ(count_2d(SelectionHistory{-1, 1, -1, 1}), (DomainCount{4, 4, 16}));
  EXPECT_EQ(flood_fill_count(history_to_pattern(SelectionHistory{-1, 1, -1, 1})), 16u);
}

TEST(Count2d, EqualsFloodFillExhaustivelyUpToK8) {
  for (unsigned k = 2; k <= 8; k += 2) {
    for (std::uint64_t s = 1; s <= (std::uint64_t{1} << k); ++s) {
      const auto h = serial_to_history(SerialNumber(s, k));
      ASSERT_EQ(count_2d(h).total_2d, flood_fill_count(history_to_pattern(h))) << "s=" << s;
    }
  }
}

TEST(Count2d, EqualsFloodFillOnRandomK12) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const std::uint64_t s = 1 + rng() % 4096;
    const auto h = serial_to_history(SerialNumber(s, 12));
    ASSERT_EQ(count_2d(h).total_2d, flood_fill_count(history_to_pattern(h))) << "s=" << s;
  }
}

TEST(Count2d, StretchLeavesCountUnchanged) {
  for (unsigned k = 2; k <= 10; k += 2) {
    for (std::uint64_t s = 1; s <= (std::uint64_t{1} << k); ++s) {
      const auto h = serial_to_history(SerialNumber(s, k));
      std::vector<std::int8_t> stretched;
      stretched.push_back(1);
      for (auto v : h.row_half()) stretched.push_back(v);
      stretched.push_back(1);
      for (auto v : h.col_half()) stretched.push_back(v);
      ASSERT_EQ(count_2d(SelectionHistory(stretched)).total_2d, count_2d(h).total_2d);
    }
  }
}

TEST(FloodFill, TrivialGrids) {
  Grid<int> ones(4, 4, 1);
  EXPECT_EQ(count_components(ones), 1u);
  Grid<int> checker(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) checker(r, c) = ((r + c) % 2) ? 1 : -1;
  EXPECT_EQ(count_components(checker), 16u);
  // Diagonal neighbours do not connect.
  Grid<int> diag(2, 2, 0);
  diag(0, 0) = diag(1, 1) = 1;
  EXPECT_EQ(count_components(diag), 4u);
}

TEST(SignChanges, Values) {
  EXPECT_EQ(sign_changes(SelectionHistory{1, 1, 1}), 0u);
  EXPECT_EQ(sign_changes(serial_to_history(SerialNumber(2, 2))), 3u);
}

TEST(SignChanges, SpectrumIsBijectiveAndMatchesCount1d) {
  for (unsigned k = 1; k <= 12; ++k) {
    const auto h = oracle::dense_hadamard(k);
    std::vector<bool> seen(h.size(), false);
    for (std::uint64_t s = 1; s <= h.size(); ++s) {
      const auto hist = serial_to_history(SerialNumber(s, k));
      const auto changes = sign_changes(hist);
      ASSERT_EQ(changes, oracle::count_sign_changes(h[s - 1]));
      ASSERT_EQ(count_1d(1, hist.values()), changes + 1);
      ASSERT_FALSE(seen[changes]);
      seen[changes] = true;
    }
  }
}

}  // namespace
}  // namespace spi
