#include "nlmc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include "nlmc/error.hpp"

namespace nlmc {

std::string Edge::label() const { return std::to_string(u) + "-" + std::to_string(v); }

Edge make_edge(std::size_t a, std::size_t b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

WeightedGraph::WeightedGraph(std::size_t n, std::span<const EdgeSpec> edges, Vec measure)
    : n_(n), weights_(n, n), lengths_(n, n), measure_(std::move(measure)), adjacency_(n) {
  if (measure_.empty()) measure_.assign(n, 1.0);
  if (measure_.size() != n) {
    throw ValidationError("measure has " + std::to_string(measure_.size()) +
                          " entries, expected " + std::to_string(n));
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (!(measure_[x] > 0.0) || !std::isfinite(measure_[x])) {
      throw ValidationError("measure of vertex " + std::to_string(x) + " must be positive");
    }
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const EdgeSpec& e = edges[i];
    const std::string where = "edge #" + std::to_string(i);
    if (e.u >= n || e.v >= n) throw ValidationError(where + ": vertex id out of range");
    if (e.u == e.v) throw ValidationError(where + ": self loop");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError(where + ": weight must be positive");
    }
    if (!(e.length > 0.0) || !std::isfinite(e.length)) {
      throw ValidationError(where + ": length must be positive");
    }
    if (weights_(e.u, e.v) > 0.0) {
      throw ValidationError(where + ": duplicate pair " + make_edge(e.u, e.v).label());
    }
    weights_(e.u, e.v) = weights_(e.v, e.u) = e.weight;
    lengths_(e.u, e.v) = lengths_(e.v, e.u) = e.length;
    edges_.push_back(make_edge(e.u, e.v));
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  std::sort(edges_.begin(), edges_.end());
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

double WeightedGraph::degree(std::size_t x) const {
  double s = 0.0;
  for (std::size_t y : adjacency_[x]) s += weights_(x, y);
  return s / measure_[x];
}

double WeightedGraph::max_degree() const {
  double best = 0.0;
  for (std::size_t x = 0; x < n_; ++x) best = std::max(best, degree(x));
  return best;
}

std::optional<std::size_t> WeightedGraph::edge_index(std::size_t x, std::size_t y) const {
  const Edge key = make_edge(x, y);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

Vec WeightedGraph::edge_lengths() const {
  Vec out;
  out.reserve(edges_.size());
  for (const Edge& e : edges_) out.push_back(lengths_(e.u, e.v));
  return out;
}

std::vector<EdgeSpec> WeightedGraph::edge_specs() const {
  std::vector<EdgeSpec> out;
  out.reserve(edges_.size());
  for (const Edge& e : edges_) {
    out.push_back({e.u, e.v, weights_(e.u, e.v), lengths_(e.u, e.v)});
  }
  return out;
}

WeightedGraph WeightedGraph::with_lengths(std::span<const double> lengths) const {
  if (lengths.size() != edges_.size()) {
    throw ValidationError("length vector does not match edge count");
  }
  auto specs = edge_specs();
  for (std::size_t i = 0; i < specs.size(); ++i) specs[i].length = lengths[i];
  return WeightedGraph(n_, specs, measure_);
}

WeightedGraph WeightedGraph::with_scaled_lengths(double factor) const {
  auto specs = edge_specs();
  for (auto& s : specs) s.length *= factor;
  return WeightedGraph(n_, specs, measure_);
}

WeightedGraph WeightedGraph::with_unit_lengths() const {
  auto specs = edge_specs();
  for (auto& s : specs) s.length = 1.0;
  return WeightedGraph(n_, specs, measure_);
}

WeightedGraph WeightedGraph::without_edge(Edge e) const {
  auto specs = edge_specs();
  std::erase_if(specs, [&](const EdgeSpec& s) { return make_edge(s.u, s.v) == e; });
  return WeightedGraph(n_, specs, measure_);
}

DistanceMatrix::DistanceMatrix(Matrix values, std::vector<std::size_t> component)
    : values_(std::move(values)), component_(std::move(component)) {}

std::optional<double> DistanceMatrix::at(std::size_t x, std::size_t y) const {
  if (!finite(x, y)) return std::nullopt;
  return values_(x, y);
}

double DistanceMatrix::operator()(std::size_t x, std::size_t y) const {
  if (!finite(x, y)) {
    throw ValidationError("vertices " + std::to_string(x) + " and " + std::to_string(y) +
                          " lie in different components");
  }
  return values_(x, y);
}

DistanceMatrix DistanceMatrix::scaled(double factor) const {
  Matrix v = values_;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) *= factor;
  return DistanceMatrix(std::move(v), component_);
}

double DistanceMatrix::max_finite() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j)
      if (finite(i, j)) best = std::max(best, values_(i, j));
  return best;
}

std::vector<std::vector<std::size_t>> Components::members() const {
  std::vector<std::vector<std::size_t>> out(count);
  for (std::size_t x = 0; x < label.size(); ++x) out[label[x]].push_back(x);
  return out;
}

Components connected_components(const WeightedGraph& g) {
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  Components c;
  c.label.assign(g.size(), unset);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (c.label[s] != unset) continue;
    c.label[s] = c.count;
    stack.push_back(s);
    while (!stack.empty()) {
      std::size_t x = stack.back();
      stack.pop_back();
      for (std::size_t y : g.neighbors(x)) {
        if (c.label[y] == unset) {
          c.label[y] = c.count;
          stack.push_back(y);
        }
      }
    }
    ++c.count;
  }
  return c;
}

namespace {

void dijkstra_row(const WeightedGraph& g, std::size_t source, std::span<double> dist) {
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [dx, x] = heap.top();
    heap.pop();
    if (dx > dist[x]) continue;
    for (std::size_t y : g.neighbors(x)) {
      const double cand = dx + g.length(x, y);
      if (cand < dist[y]) {
        dist[y] = cand;
        heap.emplace(cand, y);
      }
    }
  }
}

}  // namespace

DistanceMatrix shortest_path_metric(const WeightedGraph& g, Execution exec) {
  const std::size_t n = g.size();
  Matrix d(n, n);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n); ++s) {
      dijkstra_row(g, static_cast<std::size_t>(s), d.row(static_cast<std::size_t>(s)));
    }
  } else {
    for (std::size_t s = 0; s < n; ++s) dijkstra_row(g, s, d.row(s));
  }
  // Symmetrize exactly; the two Dijkstra runs may sum lengths in a different
  // order.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::min(d(i, j), d(j, i));
      d(i, j) = d(j, i) = std::isfinite(v) ? v : 0.0;
    }
  }
  return DistanceMatrix(std::move(d), connected_components(g).label);
}

Vec laplacian_apply(const WeightedGraph& g, std::span<const double> f) {
  if (f.size() != g.size()) throw ValidationError("function size does not match graph");
  Vec out(g.size(), 0.0);
  for (std::size_t x = 0; x < g.size(); ++x) {
    double s = 0.0;
    for (std::size_t y : g.neighbors(x)) s += g.weight(x, y) * (f[y] - f[x]);
    out[x] = s / g.measure(x);
  }
  return out;
}

double lipschitz_constant(std::span<const double> f, const DistanceMatrix& d) {
  if (f.size() != d.size()) throw ValidationError("function size does not match metric");
  double best = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    for (std::size_t y = x + 1; y < f.size(); ++y) {
      if (!d.finite(x, y)) {
        throw ValidationError("all-pairs Lipschitz constant across components (" +
                              std::to_string(x) + ", " + std::to_string(y) + ")");
      }
      best = std::max(best, std::abs(f[y] - f[x]) / d(x, y));
    }
  }
  return best;
}

double lipschitz_constant_edges(const WeightedGraph& g, std::span<const double> f,
                                const DistanceMatrix& d) {
  if (f.size() != g.size()) throw ValidationError("function size does not match graph");
  double best = 0.0;
  for (const Edge& e : g.edges()) best = std::max(best, std::abs(f[e.v] - f[e.u]) / d(e.u, e.v));
  return best;
}

double lipschitz_constant(const WeightedGraph& g, std::span<const double> f,
                          const DistanceMatrix& d, LipschitzMode mode) {
  return mode == LipschitzMode::all_pairs ? lipschitz_constant(f, d)
                                          : lipschitz_constant_edges(g, f, d);
}

double sup_norm(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a[i] - b[i]));
  return best;
}

}  // namespace nlmc
