#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "motsmine/errors.hpp"
#include "motsmine/lap.hpp"

namespace motsmine {
namespace {

PayoffMatrix random_matrix(std::mt19937_64& rng, std::size_t max_side, bool integers) {
  std::uniform_int_distribution<std::size_t> side(0, max_side);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  std::uniform_int_distribution<int> small(0, 2);
  std::bernoulli_distribution blocked(0.25);
  PayoffMatrix p(side(rng), side(rng));
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t c = 0; c < p.cols(); ++c) {
      const double v = integers ? small(rng) : value(rng);
      p.set(r, c, blocked(rng) ? kInfeasible : v);
    }
  }
  return p;
}

void expect_feasible(const PayoffMatrix& p, const Assignment& a) {
  std::set<std::size_t> rows, cols;
  for (const auto& [r, c] : a.pairs) {
    ASSERT_LT(r, p.rows());
    ASSERT_LT(c, p.cols());
    ASSERT_TRUE(rows.insert(r).second) << "row " << r << " used twice";
    ASSERT_TRUE(cols.insert(c).second) << "col " << c << " used twice";
    ASSERT_TRUE(p.feasible(r, c));
  }
  ASSERT_TRUE(std::is_sorted(a.pairs.begin(), a.pairs.end()));
}

TEST(Lap, TrivialCases) {
  EXPECT_EQ(solve_relaxed_lap(PayoffMatrix::from_rows({{1.0}})).pairs,
            (std::vector<MatchedPair>{{0, 0}}));
  EXPECT_TRUE(solve_relaxed_lap(PayoffMatrix::from_rows({{kInfeasible}})).pairs.empty());
  EXPECT_TRUE(solve_relaxed_lap(PayoffMatrix()).pairs.empty());
  EXPECT_TRUE(solve_relaxed_lap(PayoffMatrix(3, 0)).pairs.empty());
  EXPECT_TRUE(solve_relaxed_lap(PayoffMatrix(0, 4)).pairs.empty());
}

TEST(Lap, PicksDiagonal) {
  const auto p = PayoffMatrix::from_rows({{0.9, 0.1}, {0.2, 0.8}});
  const Assignment a = solve_relaxed_lap(p);
  EXPECT_EQ(a.pairs, (std::vector<MatchedPair>{{0, 0}, {1, 1}}));
  EXPECT_DOUBLE_EQ(total_payoff(p, a), 1.7);
  EXPECT_EQ(brute_force_lap(p), a);
}

TEST(Lap, CardinalityBeatsPayoff) {
  const auto p = PayoffMatrix::from_rows({{0.5, 0.5}, {0.5, kInfeasible}});
  const Assignment expected{{{0, 1}, {1, 0}}};
  EXPECT_EQ(brute_force_lap(p), expected);
  EXPECT_EQ(solve_relaxed_lap(p), expected);
  EXPECT_DOUBLE_EQ(total_payoff(p, expected), 1.0);
  // All-negative payoffs are still matched.
  const auto neg = PayoffMatrix::from_rows({{-0.9, -0.1}, {-0.2, -0.8}});
  EXPECT_EQ(solve_relaxed_lap(neg), (Assignment{{{0, 1}, {1, 0}}}));
}

TEST(Lap, ZeroPayoffIsMatchable) {
  EXPECT_EQ(solve_relaxed_lap(PayoffMatrix::from_rows({{0.0}})).size(), 1u);
}

TEST(Lap, TiesResolveLexicographically) {
  const PayoffMatrix flat(3, 3, 1.0);
  const Assignment expected{{{0, 0}, {1, 1}, {2, 2}}};
  EXPECT_EQ(solve_relaxed_lap(flat), expected);
  EXPECT_EQ(brute_force_lap(flat), expected);
  // More rows than columns: the earliest rows take the columns.
  const PayoffMatrix tall(3, 1, 1.0);
  EXPECT_EQ(solve_relaxed_lap(tall), (Assignment{{{0, 0}}}));
}

TEST(Lap, RejectsInvalidEntries) {
  PayoffMatrix p(1, 1);
  EXPECT_THROW(p.set(0, 0, std::numeric_limits<double>::quiet_NaN()), ValidationError);
  EXPECT_THROW(p.set(0, 0, std::numeric_limits<double>::infinity()), ValidationError);
  EXPECT_THROW(PayoffMatrix::from_rows({{1.0, 2.0}, {3.0}}), ValidationError);
}

TEST(Lap, BruteForceSizeLimit) {
  EXPECT_NO_THROW(brute_force_lap(PayoffMatrix(10, 2, 0.0)));
  EXPECT_THROW(brute_force_lap(PayoffMatrix(11, 2, 0.0)), ValidationError);
  EXPECT_THROW(brute_force_lap(PayoffMatrix(2, 11, 0.0)), ValidationError);
}

TEST(LapProperty, AgreesWithBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const PayoffMatrix p = random_matrix(rng, 6, false);
    const Assignment fast = solve_relaxed_lap(p);
    const Assignment slow = brute_force_lap(p);
    expect_feasible(p, fast);
    ASSERT_EQ(fast.size(), slow.size()) << "trial " << trial;
    ASSERT_EQ(total_payoff(p, fast), total_payoff(p, slow)) << "trial " << trial;
    ASSERT_EQ(fast, slow) << "trial " << trial;
  }
}

TEST(LapProperty, AgreesWithBruteForceUnderHeavyTies) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const PayoffMatrix p = random_matrix(rng, 6, true);
    ASSERT_EQ(solve_relaxed_lap(p), brute_force_lap(p)) << "trial " << trial;
  }
}

TEST(LapProperty, ShiftLeavesPairsUnchanged) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    const PayoffMatrix p = random_matrix(rng, 6, false);
    const double k = shift(rng);
    PayoffMatrix q(p.rows(), p.cols());
    for (std::size_t r = 0; r < p.rows(); ++r) {
      for (std::size_t c = 0; c < p.cols(); ++c) {
        if (p.feasible(r, c)) q.set(r, c, p.at(r, c) + k);
      }
    }
    ASSERT_EQ(solve_relaxed_lap(p), solve_relaxed_lap(q)) << "trial " << trial;
  }
}

TEST(LapProperty, LargeMatricesAreFeasibleAndMaximal) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const PayoffMatrix p = random_matrix(rng, 40, false);
    const Assignment a = solve_relaxed_lap(p);
    expect_feasible(p, a);
    // Maximality: no feasible pair joins two unmatched ends.
    std::vector<char> row_used(p.rows(), 0), col_used(p.cols(), 0);
    for (const auto& [r, c] : a.pairs) row_used[r] = col_used[c] = 1;
    for (std::size_t r = 0; r < p.rows(); ++r) {
      for (std::size_t c = 0; c < p.cols(); ++c) {
        ASSERT_FALSE(!row_used[r] && !col_used[c] && p.feasible(r, c));
      }
    }
    ASSERT_EQ(solve_relaxed_lap(p), a);
  }
}

}  // namespace
}  // namespace motsmine
