#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlmc/chain.hpp"
#include "nlmc/curvature.hpp"
#include "nlmc/execution.hpp"
#include "nlmc/graph.hpp"

namespace nlmc {

struct FlowConfig {
  double alpha = 0.5;
  std::optional<double> deletion_threshold;  // C; default 2 x initial max adjacent ratio
  double tolerance = 1e-9;
  std::size_t max_iterations = 100000;
  Execution execution = Execution::serial;
};

// max over x~y~z (x != z) of len(x,y) / len(y,z); 0 without adjacent edges.
double max_adjacent_ratio(const WeightedGraph& g);

// Fills in the default threshold and validates 0 < alpha < 1, tolerance > 0,
// C > max_adjacent_ratio(g) and deg <= 1 everywhere.
FlowConfig resolve_flow_config(const WeightedGraph& g, FlowConfig cfg);

struct DeletionRecord {
  std::size_t iteration = 0;
  Edge edge;
  double length = 0.0;
  Edge witness;  // the adjacent edge that triggered the rule
  double witness_length = 0.0;
};

struct FlowTraceRow {
  std::size_t n = 0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double delta_sup = 0.0;
  double base_value = 0.0;  // log length of the longest edge in the base edge's component
  double curvature_min = 0.0;
  double curvature_max = 0.0;
  std::vector<Edge> deleted;
};

struct FlowState {
  WeightedGraph graph;
  std::size_t iteration = 0;
  std::vector<DeletionRecord> deletions;
  std::vector<FlowTraceRow> trace;
  // run_flow keeps lengths near 1 by exact power-of-two rescaling; the true
  // lengths are graph lengths times 2^scale_exponent.
  int scale_exponent = 0;
};

// Curvature driving the flow: kappa_e = 1 - W(mu_x, mu_y) / len(e), with W
// taken in the path metric of the current lengths.
CurvatureReport flow_curvature(const WeightedGraph& g, Execution exec = Execution::serial);

// len(e) <- (1 - alpha) len(e) + alpha W(mu_x, mu_y), i.e. len(e) (1 - alpha kappa_e).
FlowState flow_step(const FlowState& state, const FlowConfig& cfg);

// Deletes the longest violating edge (ties: smallest edge), re-checks, and
// repeats until no edge is longer than C times an adjacent one.
FlowState edge_deletion_step(const FlowState& state, const FlowConfig& cfg);

// len(e) / max len(e') over the component of e, aligned with g.edges().
Vec normalize_metric(const WeightedGraph& g);

enum class FlowStatus { converged, max_iterations, oscillation };
std::string to_string(FlowStatus s);

struct ComponentLimit {
  std::vector<Edge> edges;
  Vec normalized;      // limit of len / max len
  double growth_rate = 0.0;  // log(1 - alpha kappa) per iteration
  double curvature = 0.0;    // mean limit curvature
  double spread = 0.0;
};

struct FlowResult {
  FlowState state;
  FlowConfig config;  // resolved
  FlowStatus status = FlowStatus::max_iterations;
  std::vector<ComponentLimit> components;
  CurvatureReport final_curvature;
  std::size_t last_deletion_iteration = 0;
};

using FlowObserver = std::function<void(const FlowTraceRow&)>;

// Alternates flow_step and edge_deletion_step until, on every component, the
// normalized log metric moves by less than the tolerance and the curvature
// spread is below it.
FlowResult run_flow(const WeightedGraph& g, const FlowConfig& cfg,
                    const FlowObserver& observer = {});

// The flow in log coordinates on a fixed topology: f = log len, P f = log P~(e^f).
ChainOperator log_flow_operator(const WeightedGraph& g, double alpha,
                                Execution exec = Execution::serial);

}  // namespace nlmc
