#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace motsmine {

// Payoff of a pair that must never be matched.
inline constexpr double kInfeasible = -std::numeric_limits<double>::infinity();

// Row-major payoff grid. Entries are finite reals or kInfeasible.
class PayoffMatrix {
 public:
  PayoffMatrix() = default;
  PayoffMatrix(std::size_t rows, std::size_t cols, double fill = kInfeasible);
  static PayoffMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  bool feasible(std::size_t r, std::size_t c) const { return at(r, c) != kInfeasible; }
  // Throws ValidationError on NaN or +inf.
  void set(std::size_t r, std::size_t c, double value);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

using MatchedPair = std::pair<std::size_t, std::size_t>;

// Selected (row, col) pairs, sorted ascending.
struct Assignment {
  std::vector<MatchedPair> pairs;

  std::size_t size() const { return pairs.size(); }
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Sum of the selected payoffs, accumulated in pair order.
double total_payoff(const PayoffMatrix& p, const Assignment& a);

// Totals closer than this are treated as ties by both solvers below.
double lap_tie_tolerance(const PayoffMatrix& p);

// Relaxed assignment: rows and columns may stay unmatched, and kInfeasible
// pairs are never selected. The result has maximum cardinality; among those,
// maximum total payoff; among those, the lexicographically smallest pair list.
// O((rows + cols)^3).
Assignment solve_relaxed_lap(const PayoffMatrix& p);

// Exhaustive reference with the same optimality criterion. Limited to 10x10.
Assignment brute_force_lap(const PayoffMatrix& p);

}  // namespace motsmine
