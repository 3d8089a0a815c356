#include "nlmc/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "nlmc/error.hpp"

namespace nlmc {

ProbMeasure vertex_measure(const WeightedGraph& g, std::size_t x, std::optional<double> alpha) {
  if (x >= g.size()) throw ValidationError("vertex out of range");
  const double deg = g.degree(x);
  const double scale = alpha.value_or(1.0);
  if (alpha && (*alpha < 0.0 || *alpha > 1.0)) throw ValidationError("alpha must lie in [0,1]");
  if (scale * deg > 1.0 + 1e-12) {
    throw ValidationError(alpha ? "alpha * deg(" + std::to_string(x) + ") exceeds 1"
                                : "deg(" + std::to_string(x) + ") exceeds 1");
  }
  std::vector<std::size_t> support;
  Vec mass;
  const double stay = std::max(0.0, 1.0 - scale * deg);
  // Support in increasing vertex order, the base point included.
  bool placed = false;
  double total = 0.0;
  for (std::size_t z : g.neighbors(x)) {
    if (!placed && z > x) {
      support.push_back(x);
      mass.push_back(stay);
      placed = true;
    }
    support.push_back(z);
    mass.push_back(scale * g.weight(x, z) / g.measure(x));
  }
  if (!placed) {
    support.push_back(x);
    mass.push_back(stay);
  }
  for (double v : mass) total += v;
  // Absorb rounding so the measure sums to one.
  if (std::abs(total - 1.0) > 0.0) {
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (support[i] == x) mass[i] = std::max(0.0, mass[i] + (1.0 - total));
    }
  }
  return ProbMeasure(std::move(support), std::move(mass));
}

namespace {

double kappa_from_measures(const ProbMeasure& a, const ProbMeasure& b, const DistanceMatrix& d,
                           std::size_t x, std::size_t y) {
  if (x == y) throw ValidationError("curvature needs two distinct vertices");
  const double dxy = d(x, y);
  return 1.0 - wasserstein(a, b, d).cost / dxy;
}

}  // namespace

double ollivier_kappa(const WeightedGraph& g, const DistanceMatrix& d, std::size_t x,
                      std::size_t y) {
  return kappa_from_measures(vertex_measure(g, x), vertex_measure(g, y), d, x, y);
}

double kappa_alpha(const WeightedGraph& g, const DistanceMatrix& d, std::size_t x,
                   std::size_t y, double alpha) {
  return kappa_from_measures(vertex_measure(g, x, alpha), vertex_measure(g, y, alpha), d, x, y);
}

double kappa_lly(const WeightedGraph& g, const DistanceMatrix& d, std::size_t x,
                 std::size_t y) {
  double alpha = 1e-3;
  const double deg = std::max(g.degree(x), g.degree(y));
  if (deg > 0.0) alpha = std::min(alpha, 1.0 / deg);
  for (int attempt = 0; attempt < 6; ++attempt, alpha /= 10.0) {
    const double q1 = kappa_alpha(g, d, x, y, alpha) / alpha;
    const double q2 = kappa_alpha(g, d, x, y, alpha / 2.0) / (alpha / 2.0);
    if (std::abs(q1 - q2) <= 1e-6) return q2;
  }
  throw ConvergenceError("LLY quotient did not stabilise on edge " + make_edge(x, y).label());
}

double modified_kappa_phi(const WeightedGraph& g, const DistanceMatrix& d0, std::size_t x,
                          std::size_t y, PhiShape shape) {
  const ForbidRule rule =
      shape == PhiShape::convex ? ForbidRule::three_cycles : ForbidRule::five_cycles;
  return constrained_transport_max(g, x, y, d0, rule).value;
}

double modified_kappa_phi(const WeightedGraph& g, std::size_t x, std::size_t y,
                          PhiShape shape) {
  return modified_kappa_phi(g, shortest_path_metric(g.with_unit_lengths()), x, y, shape);
}

PhiShape phi_shape_for_p(double p) { return p > 2.0 ? PhiShape::convex : PhiShape::concave; }

double CurvatureReport::min() const {
  return kappa.empty() ? 0.0 : *std::min_element(kappa.begin(), kappa.end());
}

double CurvatureReport::max() const {
  return kappa.empty() ? 0.0 : *std::max_element(kappa.begin(), kappa.end());
}

double CurvatureReport::max_spread() const {
  double s = 0.0;
  for (const auto& c : components) s = std::max(s, c.spread());
  return s;
}

CurvatureReport summarize_curvature(const WeightedGraph& g, std::vector<Edge> edges, Vec kappa) {
  CurvatureReport rep;
  const Components comps = connected_components(g);
  std::vector<ComponentCurvature> per(comps.count);
  for (std::size_t c = 0; c < comps.count; ++c) {
    per[c].component = c;
    per[c].min = std::numeric_limits<double>::infinity();
    per[c].max = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    auto& pc = per[comps.label[edges[k].u]];
    ++pc.edges;
    pc.min = std::min(pc.min, kappa[k]);
    pc.max = std::max(pc.max, kappa[k]);
  }
  for (const auto& pc : per)
    if (pc.edges > 0) rep.components.push_back(pc);
  rep.edges = std::move(edges);
  rep.kappa = std::move(kappa);
  return rep;
}

CurvatureReport curvature_report(const WeightedGraph& g, const DistanceMatrix& d,
                                 CurvatureKind kind, double alpha, Execution exec) {
  const auto& edges = g.edges();
  const std::size_t count = edges.size();
  Vec kappa(count, 0.0);
  DistanceMatrix d0;
  if (kind == CurvatureKind::modified_convex || kind == CurvatureKind::modified_concave) {
    d0 = shortest_path_metric(g.with_unit_lengths());
  }
  auto one = [&](std::size_t k) {
    const Edge e = edges[k];
    switch (kind) {
      case CurvatureKind::ollivier:
        return ollivier_kappa(g, d, e.u, e.v);
      case CurvatureKind::lazy:
        return kappa_alpha(g, d, e.u, e.v, alpha);
      case CurvatureKind::lly:
        return kappa_lly(g, d, e.u, e.v);
      case CurvatureKind::modified_convex:
        return modified_kappa_phi(g, d0, e.u, e.v, PhiShape::convex);
      case CurvatureKind::modified_concave:
        return modified_kappa_phi(g, d0, e.u, e.v, PhiShape::concave);
    }
    return 0.0;
  };

  if (exec == Execution::serial) {
    for (std::size_t k = 0; k < count; ++k) kappa[k] = one(k);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < count; ++k) {
      try {
        kappa[k] = one(k);
      } catch (...) {
#pragma omp critical(nlmc_curvature_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return summarize_curvature(g, edges, std::move(kappa));
}

}  // namespace nlmc
