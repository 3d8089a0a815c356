#pragma once

// Seeded random instance generators shared by the test suites.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "nlmc/graph.hpp"
#include "nlmc/separation.hpp"

namespace instances {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

struct GraphParams {
  std::size_t min_vertices = 4;
  std::size_t max_vertices = 10;
  double extra_edge_probability = 0.3;
  double min_length = 0.5;
  double max_length = 2.0;
  double min_weight = 0.5;
  double max_weight = 2.0;
  // m(x) = (sum of incident weights) * (1 + U[0, measure_slack]) keeps deg <= 1.
  double measure_slack = 0.5;
  bool unit_lengths = false;
};

inline std::vector<nlmc::EdgeSpec> random_connected_edges(Rng& rng, std::size_t n,
                                                          const GraphParams& p) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  std::vector<nlmc::EdgeSpec> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    used[a][b] = used[b][a] = true;
    const double len = p.unit_lengths ? 1.0 : uniform(rng, p.min_length, p.max_length);
    edges.push_back({std::min(a, b), std::max(a, b), uniform(rng, p.min_weight, p.max_weight), len});
  };
  for (std::size_t i = 1; i < n; ++i) add(order[i], order[uniform_index(rng, 0, i - 1)]);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (!used[a][b] && uniform(rng, 0.0, 1.0) < p.extra_edge_probability) add(a, b);
  return edges;
}

inline nlmc::Vec degree_bounded_measure(std::size_t n, const std::vector<nlmc::EdgeSpec>& edges,
                                        Rng& rng, double slack) {
  nlmc::Vec m(n, 0.0);
  for (const auto& e : edges) {
    m[e.u] += e.weight;
    m[e.v] += e.weight;
  }
  for (double& x : m) x = (x > 0.0 ? x : 1.0) * (1.0 + uniform(rng, 0.0, slack));
  return m;
}

inline nlmc::WeightedGraph random_connected_graph(Rng& rng, const GraphParams& p = {}) {
  const std::size_t n = uniform_index(rng, p.min_vertices, p.max_vertices);
  auto edges = random_connected_edges(rng, n, p);
  auto m = degree_bounded_measure(n, edges, rng, p.measure_slack);
  return nlmc::WeightedGraph(n, edges, m);
}

inline nlmc::Vec random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  nlmc::Vec v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

// Random probability vector of the given length.
inline nlmc::Vec random_simplex(Rng& rng, std::size_t n) {
  nlmc::Vec v(n);
  double s = 0.0;
  for (double& x : v) s += (x = uniform(rng, 0.05, 1.0));
  for (double& x : v) x /= s;
  return v;
}

// Complete graph K_n with unit weights and lengths and measure m(x) = mass.
inline nlmc::WeightedGraph complete_graph(std::size_t n, double mass) {
  std::vector<nlmc::EdgeSpec> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) edges.push_back({a, b, 1.0, 1.0});
  return nlmc::WeightedGraph(n, edges, nlmc::Vec(n, mass));
}

inline nlmc::WeightedGraph cycle_graph(std::size_t n, double mass) {
  std::vector<nlmc::EdgeSpec> edges;
  for (std::size_t a = 0; a < n; ++a) edges.push_back({a, (a + 1) % n, 1.0, 1.0});
  return nlmc::WeightedGraph(n, edges, nlmc::Vec(n, mass));
}

inline nlmc::WeightedGraph path_graph(const std::vector<double>& lengths, double mass = 2.0) {
  std::vector<nlmc::EdgeSpec> edges;
  for (std::size_t i = 0; i < lengths.size(); ++i) edges.push_back({i, i + 1, 1.0, lengths[i]});
  return nlmc::WeightedGraph(lengths.size() + 1, edges, nlmc::Vec(lengths.size() + 1, mass));
}

inline nlmc::WeightedGraph two_vertex_graph(double length = 1.0) {
  std::vector<nlmc::EdgeSpec> edges{{0, 1, 1.0, length}};
  return nlmc::WeightedGraph(2, edges);
}

// Random K; X collects a random subset of the components of V \ K, Y the rest.
inline nlmc::PartitionXKY random_partition(Rng& rng, const nlmc::WeightedGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t ksize = uniform_index(rng, 1, std::max<std::size_t>(1, n / 2));
  std::vector<bool> in_k(n, false);
  for (std::size_t i = 0; i < ksize; ++i) in_k[ids[i]] = true;
  // Components of V \ K by flood fill.
  std::vector<int> comp(n, -1);
  int count = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (in_k[s] || comp[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    comp[s] = count;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t z : g.neighbors(v))
        if (!in_k[z] && comp[z] < 0) {
          comp[z] = count;
          stack.push_back(z);
        }
    }
    ++count;
  }
  std::vector<bool> to_x(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) to_x[static_cast<std::size_t>(c)] = uniform(rng, 0, 1) < 0.5;
  std::vector<nlmc::Region> labels(n);
  for (std::size_t v = 0; v < n; ++v)
    labels[v] = in_k[v] ? nlmc::Region::K
                        : (to_x[static_cast<std::size_t>(comp[v])] ? nlmc::Region::X : nlmc::Region::Y);
  return nlmc::PartitionXKY(labels);
}

// Lip(1, K) function: the min-plus closure of random values.
inline nlmc::Vec random_lip1_on_k(Rng& rng, const nlmc::PartitionXKY& part,
                                  const nlmc::DistanceMatrix& d) {
  const auto& k = part.k();
  nlmc::Vec v = random_vector(rng, k.size(), 0.0, 1.5);
  nlmc::Vec f(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    double best = v[i];
    for (std::size_t j = 0; j < k.size(); ++j) best = std::min(best, v[j] + d(k[i], k[j]));
    f[i] = best;
  }
  return f;
}

}  // namespace instances
