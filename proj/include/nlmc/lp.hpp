#pragma once

#include <cstddef>
#include <vector>

#include "nlmc/matrix.hpp"

namespace nlmc::lp {

enum class Relation { less_equal, equal, greater_equal };

struct Constraint {
  Vec coeffs;  // one entry per variable
  Relation relation = Relation::equal;
  double rhs = 0.0;
};

// maximize objective . x  subject to  constraints, x >= 0
struct LinearProgram {
  std::size_t num_vars = 0;
  Vec objective;
  std::vector<Constraint> constraints;

  void add(Vec coeffs, Relation rel, double rhs) {
    constraints.push_back({std::move(coeffs), rel, rhs});
  }
};

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  Vec x;
  double value = 0.0;
  std::size_t pivots = 0;
};

struct Options {
  double tolerance = 1e-9;
  std::size_t max_pivots = 200000;
};

// Two-phase dense tableau simplex with Bland's smallest-index rule, so it
// terminates on degenerate problems. Throws SolverError if max_pivots is hit.
Result solve(const LinearProgram& lp, const Options& opts = {});

}  // namespace nlmc::lp
