#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nlmc/execution.hpp"
#include "nlmc/graph.hpp"
#include "nlmc/transport.hpp"

namespace nlmc {

// Without alpha: w(x,z)/m(x) at each neighbour and the remainder 1 - deg(x) at
// x (requires deg(x) <= 1). With alpha: alpha w(x,z)/m(x) at neighbours and
// 1 - alpha deg(x) at x (requires alpha deg(x) <= 1).
ProbMeasure vertex_measure(const WeightedGraph& g, std::size_t x,
                           std::optional<double> alpha = std::nullopt);

// kappa(x,y) = 1 - W(mu_x, mu_y) / d(x,y)
double ollivier_kappa(const WeightedGraph& g, const DistanceMatrix& d, std::size_t x,
                      std::size_t y);

double kappa_alpha(const WeightedGraph& g, const DistanceMatrix& d, std::size_t x,
                   std::size_t y, double alpha);

// lim kappa^alpha / alpha, read off at two small alphas where kappa^alpha is
// linear. Throws ConvergenceError if the two quotients keep disagreeing.
double kappa_lly(const WeightedGraph& g, const DistanceMatrix& d, std::size_t x,
                 std::size_t y);

enum class PhiShape { convex, concave };

// Modified curvature on an edge under the combinatorial distance d0.
double modified_kappa_phi(const WeightedGraph& g, const DistanceMatrix& d0, std::size_t x,
                          std::size_t y, PhiShape shape);
double modified_kappa_phi(const WeightedGraph& g, std::size_t x, std::size_t y,
                          PhiShape shape);

// Convex shape for p > 2 (|t|^{p-1} convex on t > 0), concave otherwise.
PhiShape phi_shape_for_p(double p);

enum class CurvatureKind { ollivier, lazy, lly, modified_convex, modified_concave };

struct ComponentCurvature {
  std::size_t component = 0;
  std::size_t edges = 0;
  double min = 0.0;
  double max = 0.0;
  double spread() const { return max - min; }
};

struct CurvatureReport {
  std::vector<Edge> edges;
  Vec kappa;  // aligned with edges
  std::vector<ComponentCurvature> components;

  double min() const;
  double max() const;
  double max_spread() const;
};

// Groups per-edge values by connected component of g.
CurvatureReport summarize_curvature(const WeightedGraph& g, std::vector<Edge> edges, Vec kappa);

// Per-edge curvature of the requested kind. The lazy kind uses `alpha`; the
// Ollivier, lazy and LLY kinds use d, the modified kinds the combinatorial
// distance.
CurvatureReport curvature_report(const WeightedGraph& g, const DistanceMatrix& d,
                                 CurvatureKind kind, double alpha = 0.5,
                                 Execution exec = Execution::serial);

}  // namespace nlmc
