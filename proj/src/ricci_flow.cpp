#include "nlmc/ricci_flow.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "nlmc/error.hpp"
#include "nlmc/format.hpp"
#include "nlmc/transport.hpp"

namespace nlmc {

double max_adjacent_ratio(const WeightedGraph& g) {
  double best = 0.0;
  for (std::size_t y = 0; y < g.size(); ++y) {
    const auto& nb = g.neighbors(y);
    for (std::size_t x : nb)
      for (std::size_t z : nb)
        if (x != z) best = std::max(best, g.length(x, y) / g.length(y, z));
  }
  return best;
}

FlowConfig resolve_flow_config(const WeightedGraph& g, FlowConfig cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  if (!(cfg.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (cfg.max_iterations == 0) throw ValidationError("max_iterations must be positive");
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (g.degree(x) > 1.0 + 1e-12)
      throw ValidationError("flow needs deg <= 1, vertex " + std::to_string(x) + " has " +
                            format_double(g.degree(x)));
  }
  const double ratio = max_adjacent_ratio(g);
  if (!cfg.deletion_threshold) cfg.deletion_threshold = 2.0 * std::max(ratio, 1.0);
  if (!(*cfg.deletion_threshold > ratio)) {
    throw ValidationError("deletion threshold " + format_double(*cfg.deletion_threshold) +
                          " must exceed the initial adjacent ratio " + format_double(ratio));
  }
  return cfg;
}

namespace {

// Exponent e with max length * 2^-e in [0.5, 1).
int length_exponent(const WeightedGraph& g) {
  double top = 0.0;
  for (double l : g.edge_lengths()) top = std::max(top, l);
  int e = 0;
  if (top > 0.0) std::frexp(top, &e);
  return e;
}

}  // namespace

CurvatureReport flow_curvature(const WeightedGraph& g_in, Execution exec) {
  // Curvature is scale invariant; evaluate at unit scale so solver
  // tolerances apply to lengths of order one.
  const int e = length_exponent(g_in);
  const WeightedGraph g = e == 0 ? g_in : g_in.with_scaled_lengths(std::ldexp(1.0, -e));
  const DistanceMatrix d = shortest_path_metric(g);
  const auto& edges = g.edges();
  std::vector<ProbMeasure> mu(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) mu[x] = vertex_measure(g, x);
  Vec kappa(edges.size());
  auto one = [&](std::size_t k) {
    const Edge e = edges[k];
    return 1.0 - wasserstein(mu[e.u], mu[e.v], d).cost / g.length(e.u, e.v);
  };
  if (exec == Execution::serial) {
    for (std::size_t k = 0; k < edges.size(); ++k) kappa[k] = one(k);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < edges.size(); ++k) {
      try {
        kappa[k] = one(k);
      } catch (...) {
#pragma omp critical(nlmc_flow_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return summarize_curvature(g, edges, std::move(kappa));
}

namespace {

Vec stepped_lengths(const WeightedGraph& g, const CurvatureReport& rep, double alpha) {
  Vec len = g.edge_lengths();
  for (std::size_t k = 0; k < len.size(); ++k) len[k] *= 1.0 - alpha * rep.kappa[k];
  return len;
}

}  // namespace

FlowState flow_step(const FlowState& state, const FlowConfig& cfg) {
  FlowState next = state;
  const auto rep = flow_curvature(state.graph, cfg.execution);
  next.graph = state.graph.with_lengths(stepped_lengths(state.graph, rep, cfg.alpha));
  next.iteration = state.iteration + 1;
  return next;
}

namespace {

struct Violation {
  Edge edge;
  double length;
  Edge witness;
  double witness_length;
};

std::optional<Violation> longest_violation(const WeightedGraph& g, double c) {
  std::optional<Violation> best;
  for (const Edge& e : g.edges()) {
    const double len = g.length(e.u, e.v);
    std::optional<Violation> mine;
    for (std::size_t end : {e.u, e.v}) {
      const std::size_t other = end == e.u ? e.v : e.u;
      for (std::size_t z : g.neighbors(end)) {
        if (z == other) continue;
        const double lz = g.length(end, z);
        if (len > c * lz && (!mine || lz < mine->witness_length))
          mine = Violation{e, len, make_edge(end, z), lz};
      }
    }
    // Edges are visited in increasing order, so a strict comparison keeps
    // the smallest edge among equally long violators.
    if (mine && (!best || mine->length > best->length)) best = mine;
  }
  return best;
}

}  // namespace

FlowState edge_deletion_step(const FlowState& state, const FlowConfig& cfg) {
  if (!cfg.deletion_threshold) throw ValidationError("deletion threshold not set");
  FlowState next = state;
  while (const auto v = longest_violation(next.graph, *cfg.deletion_threshold)) {
    next.graph = next.graph.without_edge(v->edge);
    next.deletions.push_back({state.iteration, v->edge, v->length, v->witness, v->witness_length});
  }
  return next;
}

Vec normalize_metric(const WeightedGraph& g) {
  const Components comps = connected_components(g);
  Vec top(comps.count, 0.0);
  const auto& edges = g.edges();
  for (const Edge& e : edges)
    top[comps.label[e.u]] = std::max(top[comps.label[e.u]], g.length(e.u, e.v));
  Vec out(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k)
    out[k] = g.length(edges[k].u, edges[k].v) / top[comps.label[edges[k].u]];
  return out;
}

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged:
      return "converged";
    case FlowStatus::max_iterations:
      return "max-iterations";
    case FlowStatus::oscillation:
      return "oscillation";
  }
  return "unknown";
}

namespace {

struct ComponentView {
  std::vector<std::size_t> edge_ids;  // indices into g.edges()
};

std::vector<ComponentView> component_views(const WeightedGraph& g, const Components& comps) {
  std::vector<ComponentView> views(comps.count);
  for (std::size_t k = 0; k < g.edges().size(); ++k)
    views[comps.label[g.edges()[k].u]].edge_ids.push_back(k);
  std::erase_if(views, [](const ComponentView& v) { return v.edge_ids.empty(); });
  return views;
}

}  // namespace

FlowResult run_flow(const WeightedGraph& g, const FlowConfig& cfg_in,
                    const FlowObserver& observer) {
  FlowResult result;
  result.config = resolve_flow_config(g, cfg_in);
  const FlowConfig& cfg = result.config;

  FlowState state;
  state.graph = g;
  // The initial configuration may already violate nothing by construction
  // (C exceeds the initial ratios), so deletion only follows flow steps.
  std::vector<OscillationDetector> detectors;
  bool topology_changed = true;

  while (state.iteration < cfg.max_iterations) {
    const WeightedGraph before = state.graph;
    const auto rep = flow_curvature(before, cfg.execution);
    const Vec old_len = before.edge_lengths();
    const Vec new_len = stepped_lengths(before, rep, cfg.alpha);
    state.graph = before.with_lengths(new_len);
    state.iteration += 1;

    FlowTraceRow row;
    row.n = state.iteration;
    row.curvature_min = rep.min();
    row.curvature_max = rep.max();

    // Log-coordinate diagnostics on the pre-deletion topology.
    const Components comps = connected_components(before);
    const auto views = component_views(before, comps);
    if (topology_changed) {
      detectors.assign(views.size(), OscillationDetector(cfg.tolerance));
      topology_changed = false;
    }
    row.lambda_plus = -std::numeric_limits<double>::infinity();
    row.lambda_minus = std::numeric_limits<double>::infinity();
    bool all_small = true;
    bool oscillating = false;
    std::vector<ComponentLimit> limits;
    for (std::size_t c = 0; c < views.size(); ++c) {
      const auto& ids = views[c].edge_ids;
      double old_top = 0.0, new_top = 0.0;
      for (std::size_t k : ids) {
        old_top = std::max(old_top, old_len[k]);
        new_top = std::max(new_top, new_len[k]);
      }
      Vec inc(ids.size());
      double delta = 0.0, growth = 0.0, kmin = 1.0, kmax = -1e300, ksum = 0.0;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t k = ids[i];
        const double l = std::log(new_len[k]) - std::log(old_len[k]);
        row.lambda_plus = std::max(row.lambda_plus, l);
        row.lambda_minus = std::min(row.lambda_minus, l);
        inc[i] = (std::log(new_len[k] / new_top)) - (std::log(old_len[k] / old_top));
        delta = std::max(delta, std::abs(inc[i]));
        growth += l;
        kmin = std::min(kmin, rep.kappa[k]);
        kmax = std::max(kmax, rep.kappa[k]);
        ksum += rep.kappa[k];
      }
      row.delta_sup = std::max(row.delta_sup, delta);
      if (!(delta < cfg.tolerance && kmax - kmin < cfg.tolerance)) all_small = false;
      if (detectors[c].push(inc)) oscillating = true;
      ComponentLimit lim;
      for (std::size_t k : ids) {
        lim.edges.push_back(before.edges()[k]);
        lim.normalized.push_back(new_len[k] / new_top);
      }
      lim.growth_rate = growth / static_cast<double>(ids.size());
      lim.curvature = ksum / static_cast<double>(ids.size());
      lim.spread = kmax - kmin;
      limits.push_back(std::move(lim));
    }
    if (views.empty()) {
      row.lambda_plus = row.lambda_minus = 0.0;
    }
    {
      // Base edge: the smallest surviving edge.
      const auto& ids = views.empty() ? std::vector<std::size_t>{} : views.front().edge_ids;
      double top = 0.0;
      for (std::size_t k : ids) top = std::max(top, new_len[k]);
      row.base_value = ids.empty() ? 0.0
                                   : std::log(top) + state.scale_exponent * std::log(2.0);
    }

    const std::size_t deleted_before = state.deletions.size();
    state = edge_deletion_step(state, cfg);
    for (std::size_t i = deleted_before; i < state.deletions.size(); ++i)
      row.deleted.push_back(state.deletions[i].edge);
    if (!row.deleted.empty()) {
      topology_changed = true;
      result.last_deletion_iteration = state.iteration;
    }
    state.trace.push_back(row);
    if (observer) observer(row);

    if (const int e = length_exponent(state.graph); std::abs(e) > 64) {
      state.graph = state.graph.with_scaled_lengths(std::ldexp(1.0, -e));
      state.scale_exponent += e;
    }

    if (row.deleted.empty() && all_small) {
      result.status = FlowStatus::converged;
      result.components = std::move(limits);
      break;
    }
    if (row.deleted.empty() && oscillating) {
      result.status = FlowStatus::oscillation;
      result.components = std::move(limits);
      break;
    }
    if (state.iteration == cfg.max_iterations) result.components = std::move(limits);
  }
  result.final_curvature = flow_curvature(state.graph, cfg.execution);
  result.state = std::move(state);
  if (result.status != FlowStatus::converged) {
    // Report limits for the final graph even without convergence.
    if (result.components.empty()) {
      const Vec norm = normalize_metric(result.state.graph);
      const Components comps = connected_components(result.state.graph);
      for (const auto& view : component_views(result.state.graph, comps)) {
        ComponentLimit lim;
        for (std::size_t k : view.edge_ids) {
          lim.edges.push_back(result.state.graph.edges()[k]);
          lim.normalized.push_back(norm[k]);
        }
        result.components.push_back(std::move(lim));
      }
    }
  }
  return result;
}

ChainOperator log_flow_operator(const WeightedGraph& g, double alpha, Execution exec) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
  ChainOperator p;
  p.dimension = g.edges().size();
  p.name = "log-ricci-flow";
  p.map = [g, alpha, exec](std::span<const double> f) {
    Vec len(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) len[k] = std::exp(f[k]);
    const WeightedGraph cur = g.with_lengths(len);
    const auto rep = flow_curvature(cur, exec);
    Vec out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k] + std::log(1.0 - alpha * rep.kappa[k]);
    return out;
  };
  p.declared.monotone = p.declared.strictly_monotone = true;
  p.declared.constant_additive = true;
  p.declared.non_expansive = true;
  return p;
}

}  // namespace nlmc
