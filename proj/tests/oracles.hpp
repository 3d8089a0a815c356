#pragma once

// Independent reference computations used to check the library. Nothing here
// calls into the code under test beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "nlmc/graph.hpp"
#include "nlmc/matrix.hpp"

namespace oracle {

using nlmc::Matrix;
using nlmc::Vec;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Bellman-Ford style relaxation over all pairs until nothing changes.
inline Matrix apsp_relaxation(const nlmc::WeightedGraph& g) {
  const std::size_t n = g.size();
  Matrix d(n, n, kInf);
  for (std::size_t x = 0; x < n; ++x) d(x, x) = 0.0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      for (const nlmc::Edge& e : g.edges()) {
        const double len = g.length(e.u, e.v);
        if (d(s, e.u) + len < d(s, e.v)) {
          d(s, e.v) = d(s, e.u) + len;
          changed = true;
        }
        if (d(s, e.v) + len < d(s, e.u)) {
          d(s, e.u) = d(s, e.v) + len;
          changed = true;
        }
      }
    }
  }
  return d;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }
  std::size_t count() {
    std::size_t c = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) c += find(i) == i;
    return c;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline std::size_t component_count(const nlmc::WeightedGraph& g) {
  UnionFind uf(g.size());
  for (const auto& e : g.edges()) uf.unite(e.u, e.v);
  return uf.count();
}

// Solves the square system A x = b by Gaussian elimination with partial
// pivoting; nullopt when singular.
inline std::optional<Vec> gauss_solve(Matrix a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-12) return std::nullopt;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a(i, i);
  return x;
}

// Drops linearly dependent rows of [A | b] (row echelon with tolerance).
inline void independent_rows(std::vector<Vec>& a, Vec& b) {
  std::vector<Vec> keep_a;
  Vec keep_b;
  std::vector<Vec> echelon;
  std::vector<std::size_t> pivots;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Vec row = a[i];
    for (std::size_t k = 0; k < echelon.size(); ++k) {
      const double f = row[pivots[k]] / echelon[k][pivots[k]];
      for (std::size_t c = 0; c < row.size(); ++c) row[c] -= f * echelon[k][c];
    }
    std::size_t p = row.size();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (std::abs(row[c]) > 1e-10) {
        p = c;
        break;
      }
    }
    if (p == row.size()) continue;
    echelon.push_back(row);
    pivots.push_back(p);
    keep_a.push_back(a[i]);
    keep_b.push_back(b[i]);
  }
  a = std::move(keep_a);
  b = std::move(keep_b);
}

struct VertexEnumeration {
  bool feasible = false;
  double value = -kInf;
  Vec x;
  std::size_t vertices = 0;
};

// max c.x s.t. A x = b, x >= 0 by visiting every basic feasible solution.
// Exponential, intended for at most ~12 variables.
inline VertexEnumeration lp_vertex_enumeration(std::vector<Vec> a, Vec b, const Vec& c) {
  independent_rows(a, b);
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  VertexEnumeration out;
  std::vector<std::size_t> pick(m);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == m) {
      Matrix sq(m, m);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t k = 0; k < m; ++k) sq(r, k) = a[r][pick[k]];
      auto sol = gauss_solve(sq, b);
      if (!sol) return;
      Vec x(n, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        if ((*sol)[k] < -1e-10) return;
        x[pick[k]] = std::max(0.0, (*sol)[k]);
      }
      ++out.vertices;
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += c[j] * x[j];
      if (!out.feasible || v > out.value) {
        out.feasible = true;
        out.value = v;
        out.x = x;
      }
      return;
    }
    for (std::size_t j = start; j + (m - depth) <= n; ++j) {
      pick[depth] = j;
      rec(j + 1, depth + 1);
    }
  };
  if (m == 0) {
    out.feasible = true;
    out.value = 0.0;
    out.x.assign(n, 0.0);
    return out;
  }
  rec(0, 0);
  return out;
}

// Minimal transport cost between (p on sources) and (q on targets) with cost
// matrix cost(i,j), by vertex enumeration of the transport polytope.
inline double transport_by_enumeration(const Vec& p, const Vec& q, const Matrix& cost) {
  const std::size_t a = p.size();
  const std::size_t b = q.size();
  std::vector<Vec> rows;
  Vec rhs;
  for (std::size_t i = 0; i < a; ++i) {
    Vec r(a * b, 0.0);
    for (std::size_t j = 0; j < b; ++j) r[i * b + j] = 1.0;
    rows.push_back(r);
    rhs.push_back(p[i]);
  }
  for (std::size_t j = 0; j < b; ++j) {
    Vec r(a * b, 0.0);
    for (std::size_t i = 0; i < a; ++i) r[i * b + j] = 1.0;
    rows.push_back(r);
    rhs.push_back(q[j]);
  }
  Vec c(a * b);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) c[i * b + j] = -cost(i, j);
  return -lp_vertex_enumeration(rows, rhs, c).value;
}

// Dominant eigenpair of a nonnegative matrix by normalized power iteration.
struct EigenPair {
  double value = 0.0;
  Vec vector;
};

inline EigenPair power_iteration(const Matrix& a, std::size_t iterations = 20000) {
  const std::size_t n = a.rows();
  Vec v(n, 1.0);
  double lambda = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    Vec w = a.apply(v);
    // Lazy variant (A + I) avoids periodic oscillation; eigenvalue shifts by 1.
    for (std::size_t i = 0; i < n; ++i) w[i] += v[i];
    const double norm = *std::max_element(w.begin(), w.end());
    for (double& x : w) x /= norm;
    lambda = norm - 1.0;
    v = std::move(w);
  }
  return {lambda, v};
}

// Dense solve of (I - eps * L) g = f where L is the graph Laplacian matrix.
inline Vec linear_resolvent(const nlmc::WeightedGraph& g, const Vec& f, double eps) {
  const std::size_t n = g.size();
  Matrix a = Matrix::identity(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y : g.neighbors(x)) {
      const double c = g.weight(x, y) / g.measure(x);
      a(x, y) -= eps * c;
      a(x, x) += eps * c;
    }
  }
  return *gauss_solve(a, f);
}

}  // namespace oracle
