#include "nlmc/lp.hpp"

#include <cmath>
#include <limits>

#include "nlmc/error.hpp"

namespace nlmc::lp {

namespace {

constexpr double kPivotEps = 1e-11;

// Rows 0..m-1 hold constraints, the last column is the right-hand side.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : t_(rows, cols + 1), basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return t_(r, c); }
  double at(std::size_t r, std::size_t c) const { return t_(r, c); }
  double& rhs(std::size_t r) { return t_(r, t_.cols() - 1); }
  double rhs(std::size_t r) const { return t_(r, t_.cols() - 1); }
  std::size_t rows() const { return basis_.size(); }
  std::size_t cols() const { return t_.cols() - 1; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t_(r, c);
    auto prow = t_.row(r);
    for (double& v : prow) v /= p;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (i == r) continue;
      const double factor = t_(i, c);
      if (factor == 0.0) continue;
      auto irow = t_.row(i);
      for (std::size_t j = 0; j < irow.size(); ++j) irow[j] -= factor * prow[j];
      irow[c] = 0.0;
    }
    basis_[r] = c;
  }

  void drop_row(std::size_t r) {
    Matrix next(t_.rows() - 1, t_.cols());
    for (std::size_t i = 0, k = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      for (std::size_t j = 0; j < t_.cols(); ++j) next(k, j) = t_(i, j);
      ++k;
    }
    t_ = std::move(next);
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

 private:
  Matrix t_;
  std::vector<std::size_t> basis_;
};

enum class Phase { optimal, unbounded };

// Maximizes cost . x over the current tableau using only columns < allowed.
Phase optimize(Tableau& tab, const Vec& cost, std::size_t allowed, const Options& opts,
               std::size_t& pivots) {
  const std::size_t m = tab.rows();
  while (true) {
    // Reduced profit c_j - c_B B^-1 A_j; Bland: first improving column.
    std::size_t enter = allowed;
    for (std::size_t j = 0; j < allowed; ++j) {
      double reduced = cost[j];
      for (std::size_t i = 0; i < m; ++i) reduced -= cost[tab.basis()[i]] * tab.at(i, j);
      if (reduced > opts.tolerance * 1e-3) {
        enter = j;
        break;
      }
    }
    if (enter == allowed) return Phase::optimal;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = tab.at(i, enter);
      if (a <= kPivotEps) continue;
      const double ratio = tab.rhs(i) / a;
      // Bland tie-break: smallest basic variable index among minimal ratios.
      if (ratio < best - 1e-14 ||
          (std::abs(ratio - best) <= 1e-14 && tab.basis()[i] < tab.basis()[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == m) return Phase::unbounded;
    tab.pivot(leave, enter);
    if (++pivots > opts.max_pivots) throw SolverError("simplex pivot limit exceeded");
  }
}

}  // namespace

Result solve(const LinearProgram& lp, const Options& opts) {
  const std::size_t n = lp.num_vars;
  const std::size_t m = lp.constraints.size();
  if (lp.objective.size() != n) throw ValidationError("objective size mismatch");

  std::size_t slack_count = 0;
  std::size_t art_count = 0;
  for (const auto& c : lp.constraints) {
    if (c.coeffs.size() != n) throw ValidationError("constraint size mismatch");
    // After normalizing to rhs >= 0, <= rows get a slack and >= rows a
    // surplus plus an artificial; = rows get an artificial only.
    Relation rel = c.relation;
    if (c.rhs < 0.0) {
      if (rel == Relation::less_equal) rel = Relation::greater_equal;
      else if (rel == Relation::greater_equal) rel = Relation::less_equal;
    }
    if (rel != Relation::equal) ++slack_count;
    if (rel != Relation::less_equal) ++art_count;
  }

  const std::size_t art_begin = n + slack_count;
  const std::size_t total = art_begin + art_count;
  Tableau tab(m, total);
  std::size_t next_slack = n;
  std::size_t next_art = art_begin;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = lp.constraints[i];
    const double sign = c.rhs < 0.0 ? -1.0 : 1.0;
    Relation rel = c.relation;
    if (sign < 0.0) {
      if (rel == Relation::less_equal) rel = Relation::greater_equal;
      else if (rel == Relation::greater_equal) rel = Relation::less_equal;
    }
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign * c.coeffs[j];
    tab.rhs(i) = sign * c.rhs;
    if (rel == Relation::less_equal) {
      tab.at(i, next_slack) = 1.0;
      tab.basis()[i] = next_slack++;
    } else {
      if (rel == Relation::greater_equal) tab.at(i, next_slack++) = -1.0;
      tab.at(i, next_art) = 1.0;
      tab.basis()[i] = next_art++;
    }
  }

  Result result;
  if (art_count > 0) {
    Vec phase1(total, 0.0);
    for (std::size_t j = art_begin; j < total; ++j) phase1[j] = -1.0;
    optimize(tab, phase1, total, opts, result.pivots);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < tab.rows(); ++i)
      if (tab.basis()[i] >= art_begin) infeasibility += tab.rhs(i);
    if (infeasibility > opts.tolerance) {
      result.status = Status::infeasible;
      return result;
    }
    // Drive artificials out of the basis, dropping redundant rows.
    for (std::size_t i = 0; i < tab.rows();) {
      if (tab.basis()[i] < art_begin) {
        ++i;
        continue;
      }
      std::size_t col = art_begin;
      for (std::size_t j = 0; j < art_begin; ++j) {
        if (std::abs(tab.at(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col == art_begin) {
        tab.drop_row(i);
      } else {
        tab.pivot(i, col);
        ++i;
      }
    }
  }

  Vec cost(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j];
  if (optimize(tab, cost, art_begin, opts, result.pivots) == Phase::unbounded) {
    result.status = Status::unbounded;
    return result;
  }

  result.status = Status::optimal;
  result.x.assign(n, 0.0);
  for (std::size_t i = 0; i < tab.rows(); ++i) {
    if (tab.basis()[i] < n) result.x[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
  }
  for (std::size_t j = 0; j < n; ++j) result.value += lp.objective[j] * result.x[j];
  return result;
}

}  // namespace nlmc::lp
