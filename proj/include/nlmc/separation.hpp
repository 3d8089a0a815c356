#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlmc/chain.hpp"
#include "nlmc/execution.hpp"
#include "nlmc/graph.hpp"

namespace nlmc {

enum class Region { X, K, Y };

// V = X u K u Y with K nonempty. Functions on K are indexed by the K
// vertices in increasing id order.
class PartitionXKY {
 public:
  PartitionXKY() = default;
  explicit PartitionXKY(std::vector<Region> labels);
  // Throws ValidationError unless the three sets are disjoint and cover 0..n-1.
  static PartitionXKY from_sets(std::size_t n, const std::vector<std::size_t>& x,
                                const std::vector<std::size_t>& k,
                                const std::vector<std::size_t>& y);

  std::size_t size() const noexcept { return labels_.size(); }
  Region region(std::size_t v) const { return labels_.at(v); }
  const std::vector<Region>& labels() const noexcept { return labels_; }
  const std::vector<std::size_t>& x() const noexcept { return x_; }
  const std::vector<std::size_t>& k() const noexcept { return k_; }
  const std::vector<std::size_t>& y() const noexcept { return y_; }
  // Position of v inside k(), or nullopt.
  std::optional<std::size_t> k_index(std::size_t v) const;

  // Throws ValidationError on a size mismatch or an edge between X and Y.
  void validate(const WeightedGraph& g) const;
  // d(x, y) = min_{z in K} d(x, z) + d(z, y) for all x in X, y in Y.
  bool separates(const DistanceMatrix& d, double tolerance = 1e-12) const;

 private:
  std::vector<Region> labels_;
  std::vector<std::size_t> x_, k_, y_;
};

// Largest violation of f(b) - f(a) <= d(a, b) over pairs in K (0 when f is in Lip(1, K)).
double lip1_violation(const PartitionXKY& part, const DistanceMatrix& d,
                      std::span<const double> f_on_k);

// Sf = f on K, min_{z in K} f(z) + d(., z) on Y, max_{z in K} f(z) - d(., z) on X.
// Throws ValidationError naming the violating pair when f is not in
// Lip(1, K) up to `tolerance`, or when a vertex cannot reach K.
Vec lipschitz_extend(const PartitionXKY& part, const DistanceMatrix& d,
                     std::span<const double> f_on_k, double tolerance = 1e-9);

Vec restrict_to_k(const PartitionXKY& part, std::span<const double> f);

struct SeparationOptions {
  double tolerance = 1e-9;  // engine tolerance
  std::size_t max_iterations = 100000;
  bool waive_curvature = false;
  double sign_slack = 1e-9;
  Execution execution = Execution::serial;
};

struct SeparationResult {
  IterationStatus status = IterationStatus::max_iterations;
  std::size_t iterations = 0;
  std::vector<TraceRow> trace;
  double epsilon = 0.0;
  Vec g;          // limit on K with g(x0) = 0
  Vec sg;         // S g on V
  Vec laplacian;  // Delta S g on V
  double constant = 0.0;         // midpoint of Delta S g over K
  double spread_on_k = 0.0;      // max - min of Delta S g over K
  double x_margin = 0.0;         // min over X of Delta S g - C (+inf when X is empty)
  double y_margin = 0.0;         // max over Y of Delta S g - C (-inf when Y is empty)
  bool sign_pattern = false;
  bool curvature_waived = false;
  double curvature_min = 0.0;
  double max_lip_on_k = 0.0;  // Lip on K, max over all iterates
};

// Chain P = ((id + eps Delta) S)|_K under the path metric of the lengths.
// eps defaults to half of 1 / max deg. Throws PreconditionError when some
// edge has negative Ollivier curvature (unless waived) or eps is too large.
SeparationResult separation_flow_linear(const WeightedGraph& g, const PartitionXKY& part,
                                        std::optional<double> eps, Vec f0, std::size_t x0,
                                        const SeparationOptions& opts = {});

struct PSeparationStep {
  double epsilon = 0.0;
  IterationStatus status = IterationStatus::max_iterations;
  std::size_t iterations = 0;
  Vec f_tilde;       // normalized limit on K
  Vec h;             // J_eps S f_tilde
  double gap = 0.0;  // ||h - S h||_inf
};

struct PSeparationResult {
  double p = 2.0;
  std::vector<PSeparationStep> steps;
  std::vector<TraceRow> trace;  // engine trace of the first schedule step
  IterationStatus status = IterationStatus::max_iterations;
  Vec h;          // h at the last eps
  Vec g_sub;      // element of Delta_p h, equal to (h - S f_tilde) / eps
  Vec selection;  // p = 1 edge selection realizing g_sub
  bool subgradient_member = false;
  double constant = 0.0;
  double spread_on_k = 0.0;
  double x_margin = 0.0;
  double y_margin = 0.0;
  bool sign_pattern = false;
  double fitted_c = 0.0;  // max gap / eps over the schedule
  double c_bound = 0.0;   // 2 max deg
  bool linear_decay = false;
  std::optional<double> decay_slope;  // least-squares slope of log gap against log eps
  bool curvature_waived = false;
  double curvature_min = 0.0;
  double max_lip_on_k = 0.0;
};

// eps_k = eps * 2^{-k}, k < steps.
std::vector<double> default_epsilon_schedule(double eps = 0.1, std::size_t steps = 6);

// Chain P = (J_eps S)|_K under the combinatorial distance, run to its
// normalized limit for every eps of the schedule.
PSeparationResult separation_flow_p(const WeightedGraph& g, const PartitionXKY& part, double p,
                                    Vec f0, std::size_t x0, const SeparationOptions& opts = {},
                                    std::vector<double> schedule = default_epsilon_schedule());

struct RicEstimate {
  double r = 1.0;
  double sampled = 0.0;  // 1 - max sampled Lip(Pf) / r; an upper bound on Ric_r
  std::optional<double> exact;  // linear row-stochastic P: 1 - max W(P_x, P_y) / d(x, y)
  double lower = 0.0;  // exact when available, otherwise the sampled value
  double upper = 0.0;  // sampled value
  bool rigorous = false;  // lower comes from the exact transport path
  Vec witness;  // best sampled f
};

struct RicOptions {
  std::size_t samples = 64;
  std::uint64_t seed = 0x5eed;
  std::size_t ascent_steps = 200;
  Execution execution = Execution::serial;
};

// Ric_r(P, d) = 1 - sup_{Lip(f) <= r} Lip(Pf) / r.
RicEstimate ric_r(const ChainOperator& p, const DistanceMatrix& d, double r,
                  const RicOptions& opts = {});

// Lipschitz constant over all pairs at finite distance.
double lipschitz_finite(std::span<const double> f, const DistanceMatrix& d);

struct GenericSeparationOptions : SeparationOptions {
  RicOptions ric;
};

struct GenericSeparationResult : SeparationResult {
  RicEstimate ric;
};

// Chain Ptilde = (P S)|_K with Delta = P - id. Throws PreconditionError
// when the partition does not factor d or Ric_1 is shown negative.
GenericSeparationResult separation_flow_generic(const ChainOperator& p, const PartitionXKY& part,
                                                const DistanceMatrix& d, Vec f0, std::size_t x0,
                                                const GenericSeparationOptions& opts = {});

// Linear Laplacian chain id + eps Delta as an operator on V.
ChainOperator laplacian_chain(const WeightedGraph& g, double eps);
// f -> J_eps f for the p-Laplacian.
ChainOperator resolvent_chain(const WeightedGraph& g, double p, double eps);

}  // namespace nlmc
