#include "motsmine/lap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <sstream>

#include "motsmine/errors.hpp"

namespace motsmine {
namespace {

// Cost in the ordered group Z x R, compared lexicographically. The integer
// part counts (negated) matched pairs so cardinality dominates exactly,
// without a numeric bonus that would eat into the payoff's precision.
struct LexCost {
  std::int64_t count = 0;
  double value = 0.0;

  LexCost operator+(const LexCost& o) const { return {count + o.count, value + o.value}; }
  LexCost operator-(const LexCost& o) const { return {count - o.count, value - o.value}; }
  LexCost& operator+=(const LexCost& o) { return *this = *this + o; }
  LexCost& operator-=(const LexCost& o) { return *this = *this - o; }
  bool operator<(const LexCost& o) const {
    return count != o.count ? count < o.count : value < o.value;
  }
};

constexpr std::int64_t kBlocked = std::int64_t{1} << 40;
constexpr LexCost kBlockedCost{kBlocked, 0.0};
constexpr LexCost kUnbounded{std::int64_t{1} << 60, 0.0};

// Square cost matrix over rows = real rows + one dummy per column and
// cols = real cols + one dummy per row. Real row i may fall back to dummy
// column C+i ("unmatched"); real column j to dummy row R+j; dummies pair
// freely among themselves.
class PaddedCosts {
 public:
  explicit PaddedCosts(const PayoffMatrix& p) : p_(p), n_(p.rows() + p.cols()) {}

  std::size_t size() const { return n_; }

  LexCost operator()(std::size_t i, std::size_t j) const {
    const std::size_t r = p_.rows();
    const std::size_t c = p_.cols();
    if (i < r && j < c) {
      return p_.feasible(i, j) ? LexCost{-1, -p_.at(i, j)} : kBlockedCost;
    }
    if (i < r) return j - c == i ? LexCost{} : kBlockedCost;
    if (j < c) return i - r == j ? LexCost{} : kBlockedCost;
    return LexCost{};
  }

 private:
  const PayoffMatrix& p_;
  std::size_t n_;
};

struct DualSolution {
  std::vector<std::size_t> row_to_col;
  std::vector<std::size_t> col_to_row;
  std::vector<LexCost> row_potential;
  std::vector<LexCost> col_potential;
};

// Shortest augmenting path Hungarian method with row/column potentials.
DualSolution hungarian(const PaddedCosts& cost) {
  const std::size_t n = cost.size();
  // 1-based with index 0 as the virtual source column.
  std::vector<LexCost> u(n + 1), v(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<LexCost> minv(n + 1, kUnbounded);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      LexCost delta = kUnbounded;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        LexCost cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  DualSolution sol;
  sol.row_to_col.assign(n, 0);
  sol.col_to_row.assign(n, 0);
  sol.row_potential.assign(u.begin() + 1, u.end());
  sol.col_potential.assign(v.begin() + 1, v.end());
  for (std::size_t j = 1; j <= n; ++j) {
    sol.col_to_row[j - 1] = p[j] - 1;
    sol.row_to_col[p[j] - 1] = j - 1;
  }
  return sol;
}

// Rewrites the optimal perfect matching into the lexicographically smallest
// one. Every optimal matching uses only edges that are tight under the final
// potentials, so it suffices to pick, row by row, the smallest tight column
// that still admits a perfect matching of the remaining rows.
void lexicographic_refine(const PaddedCosts& cost, const PayoffMatrix& p,
                          DualSolution& sol, double tolerance) {
  const std::size_t n = cost.size();
  const std::size_t real_rows = p.rows();
  const std::size_t real_cols = p.cols();

  std::vector<std::vector<std::size_t>> tight(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      LexCost reduced = cost(i, j) - sol.row_potential[i] - sol.col_potential[j];
      if (reduced.count == 0 && std::abs(reduced.value) <= tolerance) {
        tight[i].push_back(j);
      }
    }
  }
  // The current matching is tight by construction, but rounding could push a
  // matched edge just past the tolerance; keep it reachable regardless.
  for (std::size_t i = 0; i < n; ++i) {
    auto& adj = tight[i];
    if (std::find(adj.begin(), adj.end(), sol.row_to_col[i]) == adj.end()) {
      adj.insert(std::lower_bound(adj.begin(), adj.end(), sol.row_to_col[i]),
                 sol.row_to_col[i]);
    }
  }

  std::vector<char> fixed(n, 0);
  auto& row_to_col = sol.row_to_col;
  auto& col_to_row = sol.col_to_row;

  // Moves row i onto column `target` and repairs the matching with an
  // alternating path that avoids fixed rows. Returns false if impossible.
  auto try_reassign = [&](std::size_t i, std::size_t target) {
    const std::size_t displaced = col_to_row[target];
    if (fixed[displaced]) return false;
    const std::size_t freed = row_to_col[i];
    const std::size_t none = n;
    std::vector<std::size_t> parent_col(n, none);  // row -> col used to reach it
    std::vector<std::size_t> parent_row(n, none);  // col -> row it was reached from
    std::vector<char> seen_row(n, 0), seen_col(n, 0);
    std::deque<std::size_t> queue{displaced};
    seen_row[displaced] = 1;
    seen_col[target] = 1;
    while (!queue.empty()) {
      const std::size_t x = queue.front();
      queue.pop_front();
      for (std::size_t y : tight[x]) {
        if (seen_col[y]) continue;
        seen_col[y] = 1;
        parent_row[y] = x;
        if (y == freed) {
          // Augment back along the path.
          std::size_t col = y;
          while (true) {
            const std::size_t row = parent_row[col];
            const std::size_t prev_col = parent_col[row];
            row_to_col[row] = col;
            col_to_row[col] = row;
            if (row == displaced) break;
            col = prev_col;
          }
          row_to_col[i] = target;
          col_to_row[target] = i;
          return true;
        }
        const std::size_t z = col_to_row[y];
        if (z == i || fixed[z] || seen_row[z]) continue;
        seen_row[z] = 1;
        parent_col[z] = y;
        queue.push_back(z);
      }
    }
    return false;
  };

  for (std::size_t i = 0; i < real_rows; ++i) {
    std::vector<std::size_t> options;
    for (std::size_t j : tight[i]) {
      if (j < real_cols) options.push_back(j);
    }
    options.push_back(real_cols + i);  // staying unmatched sorts last
    for (std::size_t c : options) {
      if (row_to_col[i] == c) break;
      if (std::find(tight[i].begin(), tight[i].end(), c) == tight[i].end()) continue;
      if (try_reassign(i, c)) break;
    }
    fixed[i] = 1;
  }
}

struct BruteForceSearch {
  const PayoffMatrix& p;
  double tolerance;
  std::vector<char> col_used;
  std::vector<MatchedPair> current;
  std::vector<MatchedPair> best;
  double best_total = 0.0;
  bool have_best = false;

  void run(std::size_t row, double total) {
    if (row == p.rows()) {
      bool better = !have_best || current.size() > best.size() ||
                    (current.size() == best.size() && total > best_total + tolerance);
      if (better) {
        best = current;
        best_total = total;
        have_best = true;
      }
      return;
    }
    // Matched options first, in column order, then "unmatched": depth-first
    // order then visits pair lists in lexicographic order, so the first of
    // several tied optima wins.
    for (std::size_t c = 0; c < p.cols(); ++c) {
      if (col_used[c] || !p.feasible(row, c)) continue;
      col_used[c] = 1;
      current.emplace_back(row, c);
      run(row + 1, total + p.at(row, c));
      current.pop_back();
      col_used[c] = 0;
    }
    run(row + 1, total);
  }
};

}  // namespace

PayoffMatrix::PayoffMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, kInfeasible) {
  if (fill != kInfeasible) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) set(r, c, fill);
    }
  }
}

PayoffMatrix PayoffMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  PayoffMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ValidationError("ragged payoff matrix");
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c]);
  }
  return m;
}

void PayoffMatrix::set(std::size_t r, std::size_t c, double value) {
  if (std::isnan(value) || value == std::numeric_limits<double>::infinity()) {
    std::ostringstream msg;
    msg << "payoff (" << r << ", " << c << ") must be finite or -inf, got " << value;
    throw ValidationError(msg.str());
  }
  values_[r * cols_ + c] = value;
}

double total_payoff(const PayoffMatrix& p, const Assignment& a) {
  double total = 0.0;
  for (const auto& [r, c] : a.pairs) total += p.at(r, c);
  return total;
}

double lap_tie_tolerance(const PayoffMatrix& p) {
  double scale = 1.0;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t c = 0; c < p.cols(); ++c) {
      if (p.feasible(r, c)) scale = std::max(scale, std::abs(p.at(r, c)));
    }
  }
  return 1e-9 * scale;
}

Assignment solve_relaxed_lap(const PayoffMatrix& p) {
  Assignment result;
  if (p.rows() == 0 || p.cols() == 0) return result;
  PaddedCosts cost(p);
  DualSolution sol = hungarian(cost);
  lexicographic_refine(cost, p, sol, lap_tie_tolerance(p));
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const std::size_t j = sol.row_to_col[i];
    if (j < p.cols()) result.pairs.emplace_back(i, j);
  }
  return result;
}

Assignment brute_force_lap(const PayoffMatrix& p) {
  if (p.rows() > 10 || p.cols() > 10) {
    std::ostringstream msg;
    msg << "brute_force_lap supports at most 10x10, got " << p.rows() << "x" << p.cols();
    throw ValidationError(msg.str());
  }
  BruteForceSearch search{p, lap_tie_tolerance(p), std::vector<char>(p.cols(), 0), {}, {}};
  search.run(0, 0.0);
  return Assignment{search.best};
}

}  // namespace motsmine
