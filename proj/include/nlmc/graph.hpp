#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlmc/execution.hpp"
#include "nlmc/matrix.hpp"

namespace nlmc {

// Undirected edge in canonical orientation u < v. Ordering is lexicographic,
// which is the tie-breaking order used throughout the library.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  auto operator<=>(const Edge&) const = default;
  std::string label() const;
};

Edge make_edge(std::size_t a, std::size_t b);

struct EdgeSpec {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 1.0;
  double length = 1.0;
};

// Finite weighted graph G = (V, w, m) carrying a length on every edge. The
// lengths induce the path metric returned by shortest_path_metric.
//
// Vertices are the dense ids 0..N-1. Instances are immutable; the mutating
// helpers return modified copies.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  // Throws ValidationError on self loops, duplicate pairs, out-of-range ids,
  // nonpositive weights, lengths or measures. An empty measure means m = 1.
  WeightedGraph(std::size_t n, std::span<const EdgeSpec> edges, Vec measure = {});

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t x) const { return adjacency_[x]; }

  bool adjacent(std::size_t x, std::size_t y) const { return weight(x, y) > 0.0; }
  double weight(std::size_t x, std::size_t y) const { return weights_(x, y); }
  double length(std::size_t x, std::size_t y) const { return lengths_(x, y); }
  double measure(std::size_t x) const { return measure_[x]; }
  const Vec& measures() const noexcept { return measure_; }

  // deg(x) = sum_y w(x,y) / m(x)
  double degree(std::size_t x) const;
  double max_degree() const;

  // Index of the edge in edges(), or nullopt.
  std::optional<std::size_t> edge_index(std::size_t x, std::size_t y) const;

  Vec edge_lengths() const;

  // Lengths are given in edges() order.
  WeightedGraph with_lengths(std::span<const double> lengths) const;
  WeightedGraph with_scaled_lengths(double factor) const;
  WeightedGraph with_unit_lengths() const;
  WeightedGraph without_edge(Edge e) const;

  std::vector<EdgeSpec> edge_specs() const;

 private:
  std::size_t n_ = 0;
  Matrix weights_;
  Matrix lengths_;
  Vec measure_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

// Pairwise distances with an explicit reachability flag. Pairs in different
// connected components have no numeric distance; asking for one throws.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(Matrix values, std::vector<std::size_t> component);

  std::size_t size() const noexcept { return component_.size(); }
  bool finite(std::size_t x, std::size_t y) const { return component_[x] == component_[y]; }
  std::optional<double> at(std::size_t x, std::size_t y) const;
  // Throws ValidationError for pairs at infinite distance.
  double operator()(std::size_t x, std::size_t y) const;
  std::size_t component(std::size_t x) const { return component_[x]; }

  DistanceMatrix scaled(double factor) const;
  double max_finite() const;

 private:
  Matrix values_;
  std::vector<std::size_t> component_;
};

struct Components {
  std::vector<std::size_t> label;  // component id per vertex, ids in order of first vertex
  std::size_t count = 0;

  std::vector<std::vector<std::size_t>> members() const;
};

Components connected_components(const WeightedGraph& g);

// Dijkstra from every source. Independent per source, hence the parallel
// variant.
DistanceMatrix shortest_path_metric(const WeightedGraph& g,
                                    Execution exec = Execution::serial);

// Delta f(x) = (1/m(x)) sum_y w(x,y) (f(y) - f(x))
Vec laplacian_apply(const WeightedGraph& g, std::span<const double> f);

enum class LipschitzMode { all_pairs, edges_only };

// max |f(y) - f(x)| / d(x,y) over distinct pairs. Throws ValidationError if
// the metric has more than one component.
double lipschitz_constant(std::span<const double> f, const DistanceMatrix& d);
// Same maximum restricted to the edges of g.
double lipschitz_constant_edges(const WeightedGraph& g, std::span<const double> f,
                                const DistanceMatrix& d);
double lipschitz_constant(const WeightedGraph& g, std::span<const double> f,
                          const DistanceMatrix& d, LipschitzMode mode);

double sup_norm(std::span<const double> v);
double sup_distance(std::span<const double> a, std::span<const double> b);

}  // namespace nlmc
