#pragma once

#include <cstddef>
#include <vector>

#include "nlmc/graph.hpp"
#include "nlmc/matrix.hpp"

namespace nlmc {

// Finitely supported probability measure on vertex ids.
class ProbMeasure {
 public:
  ProbMeasure() = default;
  // Throws ValidationError on repeated support points, negative masses or a
  // total differing from 1 by more than 1e-12.
  ProbMeasure(std::vector<std::size_t> support, Vec mass);

  static ProbMeasure dirac(std::size_t x) { return ProbMeasure({x}, {1.0}); }

  const std::vector<std::size_t>& support() const noexcept { return support_; }
  const Vec& mass() const noexcept { return mass_; }
  std::size_t size() const noexcept { return support_.size(); }
  double mass_at(std::size_t vertex) const;

 private:
  std::vector<std::size_t> support_;
  Vec mass_;
};

// Dense coupling between two finite supports.
struct TransportPlan {
  std::vector<std::size_t> sources;
  std::vector<std::size_t> targets;
  Matrix mass;  // sources.size() x targets.size()

  double row_sum(std::size_t i) const;
  double col_sum(std::size_t j) const;
  double cost(const DistanceMatrix& d) const;
  // Largest deviation of row/column sums from the given marginals.
  double marginal_error(const ProbMeasure& source, const ProbMeasure& target) const;
};

struct WassersteinResult {
  double cost = 0.0;
  TransportPlan plan;
  std::size_t pivots = 0;
};

// Exact W_1 by the transportation simplex (northwest-corner start, MODI
// potentials, Bland entering/leaving rule). Throws ValidationError if the
// supports do not share one component of d.
WassersteinResult wasserstein(const ProbMeasure& mu1, const ProbMeasure& mu2,
                              const DistanceMatrix& d);

struct DualCertificate {
  Vec potential;        // one value per vertex; 1-Lipschitz on the support component
  double dual_value = 0.0;
  double primal_value = 0.0;
  double gap = 0.0;
  double lipschitz = 0.0;  // Lipschitz constant of the potential on the supports
  bool certified = false;  // gap <= 1e-7, potential 1-Lipschitz, plan feasible
};

// Solves the Kantorovich-Rubinstein dual with the general simplex,
// independently of the primal solver, and compares objective values.
DualCertificate dual_certificate(const ProbMeasure& mu1, const ProbMeasure& mu2,
                                 const DistanceMatrix& d, const TransportPlan& plan);

enum class ForbidRule { none, three_cycles, five_cycles };

struct ConstrainedTransport {
  double value = 0.0;
  TransportPlan plan;
};

// Maximizes sum pi(x',y') (1 - d0(x',y')/d0(x,y)) over plans on
// B1(x) x B1(y) whose sphere marginals are w(x,.)/m(x) and w(y,.)/m(y), with
// total mass 1 and the entries selected by `forbid` pinned to zero.
// three_cycles forbids x' = y'; five_cycles forbids x' != x, y' != y with
// d0(x',y') = 2. Throws PreconditionError when the system is infeasible.
ConstrainedTransport constrained_transport_max(const WeightedGraph& g, std::size_t x,
                                               std::size_t y, const DistanceMatrix& d0,
                                               ForbidRule forbid);

}  // namespace nlmc

namespace nlmc {

// Optional global audit: while enabled, every wasserstein() call is followed
// by dual_certificate() and the outcome is tallied. Thread-safe.
struct TransportAudit {
  std::size_t calls = 0;
  std::size_t certified = 0;
  double max_gap = 0.0;
};

void enable_transport_audit(bool on);
bool transport_audit_enabled();
TransportAudit transport_audit();
void reset_transport_audit();

}  // namespace nlmc
