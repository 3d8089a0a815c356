#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlmc/matrix.hpp"

namespace nlmc {

// Structural claims attached to an operator. They are checked statistically
// by verify_properties and never trusted by the diagnostics.
struct DeclaredProperties {
  bool monotone = false;
  bool strictly_monotone = false;
  std::optional<double> uniformly_strictly_monotone;  // epsilon_0
  bool constant_additive = false;
  bool non_expansive = false;
  std::optional<std::size_t> connected;                                   // n_0
  std::optional<std::pair<std::size_t, double>> uniformly_connected;      // (n_0, epsilon_0)

  std::vector<std::string> names() const;
};

// Self-map of R^N given as a function object.
struct ChainOperator {
  std::size_t dimension = 0;
  std::function<Vec(std::span<const double>)> map;
  std::string name;
  DeclaredProperties declared;
  std::optional<Matrix> linear;  // present when P f = A f

  // Validates the dimension and aborts with SolverError on non-finite output.
  Vec operator()(std::span<const double> f) const;
  Vec power(std::span<const double> f, std::size_t n) const;
};

ChainOperator identity_operator(std::size_t n);
ChainOperator shift_operator(std::size_t n, double shift);
ChainOperator linear_operator(Matrix a, std::string name = "linear");
ChainOperator compose(const ChainOperator& outer, const ChainOperator& inner);

struct LambdaDiagnostics {
  double plus = 0.0;   // max(Pf - f)
  double minus = 0.0;  // min(Pf - f)
  std::vector<std::size_t> argmax;
  std::vector<std::size_t> argmin;
};

LambdaDiagnostics lambda_diagnostics(std::span<const double> f, std::span<const double> pf,
                                     double tie_tolerance = 0.0);
LambdaDiagnostics lambda_diagnostics(const ChainOperator& p, std::span<const double> f);

// f - f(x0)
Vec normalize_at(std::span<const double> f, std::size_t x0);

// Watches successive normalized increments D_n = (P f_n - f_n) - (..)(x0)
// for a period-2 pattern: D_{k+2} = D_k and D_{k+3} = D_{k+1} within
// tolerance while D_{k+1} differs from D_k. Needs four increments.
class OscillationDetector {
 public:
  explicit OscillationDetector(double tolerance) : tol_(tolerance) {}
  bool push(Vec normalized_increment);
  void reset() { window_.clear(); }

 private:
  static double sup_diff(const Vec& a, const Vec& b);

  double tol_;
  std::deque<Vec> window_;
};

enum class IterationStatus { converged, diverged_unbounded, oscillating, max_iterations };
std::string to_string(IterationStatus s);

struct TraceRow {
  std::size_t n = 0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double delta_sup = 0.0;
  double base_value = 0.0;
};

struct IterationOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 100000;
  double divergence_bound = 1e12;
  bool detect_oscillation = true;
  // Iterate on the normalized vector and carry the base value separately.
  // Default: on when P declares constant additivity.
  std::optional<bool> renormalize;
  std::function<void(const TraceRow&, std::span<const double> normalized)> observer;
};

struct IterationResult {
  IterationStatus status = IterationStatus::max_iterations;
  std::optional<Vec> limit;    // normalized limit g with g(x0) = 0
  std::optional<double> growth;
  std::size_t iterations = 0;
  std::vector<TraceRow> trace;
  Vec last;             // last iterate P^n f (reconstructed when renormalizing)
  Vec last_normalized;  // last iterate minus its value at x0
};

// Iterates f <- P f and follows f_n = P^n f - P^n f(x0). Converged when
// ||f_{n+1} - f_n|| < tol and lambda_+ - lambda_- < tol.
IterationResult iterate_normalized(const ChainOperator& p, Vec f0, std::size_t x0,
                                   const IterationOptions& opts = {});

struct ConditionReport {
  int condition = 0;  // 1..7
  std::string name;
  bool declared = false;
  std::size_t trials = 0;
  std::size_t failures = 0;
  bool passed = false;
  std::optional<double> estimate;      // observed epsilon_0 for the uniform conditions
  std::optional<std::size_t> n0;       // smallest working n_0 for the connectedness conditions
  std::string witness;                 // first counterexample, human readable
  double witness_ratio = 0.0;          // e.g. ||Pf-Pg|| / ||f-g|| for nonexpansiveness
};

struct PropertyReport {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double magnitude = 0.0;
  std::size_t n0_cap = 0;
  std::vector<ConditionReport> conditions;  // conditions 1..7 in order

  const ConditionReport& condition(int k) const { return conditions.at(k - 1); }
};

// Randomized check of the seven chain conditions: f >= g is enforced by drawing g
// and adding a nonnegative perturbation. n0 is searched up to n0_cap
// (default: the dimension).
PropertyReport verify_properties(const ChainOperator& p, std::size_t samples, double magnitude,
                                 std::uint64_t seed, std::optional<std::size_t> n0_cap = {});

// Generating family for a domain closed under constants: returns base
// vectors v such that the domain near f is covered by v + c.
using FamilyProvider = std::function<std::vector<Vec>(std::span<const double> f)>;

// Pbar f = min over family bases v of P(v + c) - eps (v + c - f), with
// c = max(f - v) the smallest shift dominating f. Throws PreconditionError
// when the family is empty.
ChainOperator extend_operator(const ChainOperator& p, double eps, FamilyProvider family);

// Four-dimensional chain from the non-convergence example: exact on the
// parametrized family, extended with eps = 1/2 elsewhere.
ChainOperator counterexample_operator(double eps0 = 0.01);
Vec counterexample_start(double eps0 = 0.01);

// Pf = (f + log min_A A e^f) / 2 for a nonempty family of nonnegative
// matrices. Throws ValidationError when some row is zero in a member.
ChainOperator perron_frobenius_operator(const std::vector<Matrix>& family);
// Lambda(v) = min_A A v, component-wise.
Vec min_family_apply(const std::vector<Matrix>& family, std::span<const double> v);

}  // namespace nlmc
