#include "nlmc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "nlmc/error.hpp"
#include "nlmc/format.hpp"
#include "nlmc/graph.hpp"

namespace nlmc {

std::vector<std::string> DeclaredProperties::names() const {
  std::vector<std::string> out;
  if (monotone) out.push_back("monotone");
  if (strictly_monotone) out.push_back("strictly-monotone");
  if (uniformly_strictly_monotone)
    out.push_back("uniformly-strictly-monotone(" + format_double(*uniformly_strictly_monotone) +
                  ")");
  if (constant_additive) out.push_back("constant-additive");
  if (non_expansive) out.push_back("non-expansive");
  if (connected) out.push_back("connected(" + std::to_string(*connected) + ")");
  if (uniformly_connected)
    out.push_back("uniformly-connected(" + std::to_string(uniformly_connected->first) + ", " +
                  format_double(uniformly_connected->second) + ")");
  return out;
}

Vec ChainOperator::operator()(std::span<const double> f) const {
  if (f.size() != dimension) {
    throw ValidationError(name + ": expected a vector of length " + std::to_string(dimension));
  }
  Vec out = map(f);
  if (out.size() != dimension) throw SolverError(name + ": output has the wrong dimension");
  for (double v : out) {
    if (!std::isfinite(v)) throw SolverError(name + ": non-finite value in P f");
  }
  return out;
}

Vec ChainOperator::power(std::span<const double> f, std::size_t n) const {
  Vec cur(f.begin(), f.end());
  for (std::size_t i = 0; i < n; ++i) cur = (*this)(cur);
  return cur;
}

ChainOperator identity_operator(std::size_t n) {
  ChainOperator p;
  p.dimension = n;
  p.name = "identity";
  p.map = [](std::span<const double> f) { return Vec(f.begin(), f.end()); };
  p.declared.monotone = p.declared.strictly_monotone = true;
  p.declared.uniformly_strictly_monotone = 1.0;
  p.declared.constant_additive = p.declared.non_expansive = true;
  p.linear = Matrix::identity(n);
  return p;
}

ChainOperator shift_operator(std::size_t n, double shift) {
  ChainOperator p;
  p.dimension = n;
  p.name = "shift";
  p.map = [shift](std::span<const double> f) {
    Vec out(f.begin(), f.end());
    for (double& v : out) v += shift;
    return out;
  };
  p.declared.monotone = p.declared.strictly_monotone = true;
  p.declared.constant_additive = p.declared.non_expansive = true;
  return p;
}

ChainOperator linear_operator(Matrix a, std::string name) {
  if (a.rows() != a.cols()) throw ValidationError("linear operator needs a square matrix");
  ChainOperator p;
  p.dimension = a.rows();
  p.name = std::move(name);
  p.map = [a](std::span<const double> f) { return a.apply(f); };
  bool nonneg = true, stochastic = true, positive_diag = true;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      nonneg = nonneg && a(r, c) >= 0.0;
      s += a(r, c);
    }
    stochastic = stochastic && std::abs(s - 1.0) <= 1e-12;
    positive_diag = positive_diag && a(r, r) > 0.0;
  }
  p.declared.monotone = nonneg;
  p.declared.constant_additive = stochastic;
  p.declared.non_expansive = nonneg && stochastic;
  p.declared.strictly_monotone = nonneg && positive_diag;
  p.linear = std::move(a);
  return p;
}

ChainOperator compose(const ChainOperator& outer, const ChainOperator& inner) {
  if (outer.dimension != inner.dimension) throw ValidationError("dimension mismatch in compose");
  ChainOperator p;
  p.dimension = inner.dimension;
  p.name = outer.name + "*" + inner.name;
  p.map = [outer, inner](std::span<const double> f) { return outer(inner(f)); };
  const auto& a = outer.declared;
  const auto& b = inner.declared;
  p.declared.monotone = a.monotone && b.monotone;
  p.declared.strictly_monotone = a.strictly_monotone && b.strictly_monotone;
  if (a.uniformly_strictly_monotone && b.uniformly_strictly_monotone)
    p.declared.uniformly_strictly_monotone =
        *a.uniformly_strictly_monotone * *b.uniformly_strictly_monotone;
  p.declared.constant_additive = a.constant_additive && b.constant_additive;
  p.declared.non_expansive = a.non_expansive && b.non_expansive;
  if (outer.linear && inner.linear) {
    const Matrix& x = *outer.linear;
    const Matrix& y = *inner.linear;
    Matrix prod(x.rows(), y.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t k = 0; k < x.cols(); ++k)
        for (std::size_t c = 0; c < y.cols(); ++c) prod(r, c) += x(r, k) * y(k, c);
    p.linear = std::move(prod);
  }
  return p;
}

LambdaDiagnostics lambda_diagnostics(std::span<const double> f, std::span<const double> pf,
                                     double tie_tolerance) {
  if (f.size() != pf.size() || f.empty()) throw ValidationError("lambda diagnostics: bad sizes");
  LambdaDiagnostics out;
  out.plus = -std::numeric_limits<double>::infinity();
  out.minus = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double l = pf[i] - f[i];
    out.plus = std::max(out.plus, l);
    out.minus = std::min(out.minus, l);
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double l = pf[i] - f[i];
    if (l >= out.plus - tie_tolerance) out.argmax.push_back(i);
    if (l <= out.minus + tie_tolerance) out.argmin.push_back(i);
  }
  return out;
}

LambdaDiagnostics lambda_diagnostics(const ChainOperator& p, std::span<const double> f) {
  return lambda_diagnostics(f, p(f));
}

Vec normalize_at(std::span<const double> f, std::size_t x0) {
  if (x0 >= f.size()) throw ValidationError("base vertex out of range");
  Vec out(f.begin(), f.end());
  const double base = f[x0];
  for (double& v : out) v -= base;
  return out;
}

bool OscillationDetector::push(Vec normalized_increment) {
  window_.push_back(std::move(normalized_increment));
  if (window_.size() > 4) window_.pop_front();
  if (window_.size() < 4) return false;
  const double same_a = sup_diff(window_[2], window_[0]);
  const double same_b = sup_diff(window_[3], window_[1]);
  const double flip = sup_diff(window_[1], window_[0]);
  return same_a < tol_ && same_b < tol_ && flip >= tol_ && same_a <= 1e-3 * flip &&
         same_b <= 1e-3 * flip;
}

double OscillationDetector::sup_diff(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

std::string to_string(IterationStatus s) {
  switch (s) {
    case IterationStatus::converged:
      return "converged";
    case IterationStatus::diverged_unbounded:
      return "diverged-unbounded";
    case IterationStatus::oscillating:
      return "oscillating";
    case IterationStatus::max_iterations:
      return "max-iterations";
  }
  return "unknown";
}

IterationResult iterate_normalized(const ChainOperator& p, Vec f0, std::size_t x0,
                                   const IterationOptions& opts) {
  if (!(opts.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (f0.size() != p.dimension) throw ValidationError("initial vector has the wrong dimension");
  if (x0 >= p.dimension) throw ValidationError("base vertex out of range");
  for (double v : f0)
    if (!std::isfinite(v)) throw ValidationError("initial vector must be finite");

  const bool renorm = opts.renormalize.value_or(p.declared.constant_additive);
  long double offset = 0.0L;
  Vec f = std::move(f0);
  if (renorm) {
    offset = f[x0];
    f = normalize_at(f, x0);
  }
  IterationResult res;
  OscillationDetector detector(opts.tolerance);
  for (std::size_t n = 1; n <= opts.max_iterations; ++n) {
    Vec pf = p(f);
    const auto diag = lambda_diagnostics(f, pf);
    Vec inc(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) inc[i] = pf[i] - f[i];
    const double step_growth = inc[x0];
    double delta = 0.0;
    for (double& v : inc) {
      v -= step_growth;
      delta = std::max(delta, std::abs(v));
    }
    if (renorm) {
      offset += pf[x0];
      f = normalize_at(pf, x0);
    } else {
      f = std::move(pf);
    }
    TraceRow row{n, diag.plus, diag.minus, delta,
                 renorm ? static_cast<double>(offset) : f[x0]};
    res.trace.push_back(row);
    res.iterations = n;
    Vec fhat = renorm ? f : normalize_at(f, x0);
    if (opts.observer) opts.observer(row, fhat);

    if (delta < opts.tolerance && diag.plus - diag.minus < opts.tolerance) {
      res.status = IterationStatus::converged;
      res.limit = fhat;
      res.growth = step_growth;
    } else {
      const auto [lo, hi] = std::minmax_element(fhat.begin(), fhat.end());
      if (*hi - *lo > opts.divergence_bound) {
        res.status = IterationStatus::diverged_unbounded;
      } else if (opts.detect_oscillation && detector.push(std::move(inc))) {
        res.status = IterationStatus::oscillating;
      }
    }
    res.last_normalized = fhat;
    if (res.status != IterationStatus::max_iterations) break;
  }
  res.last = f;
  if (renorm)
    for (double& v : res.last) v = static_cast<double>(v + offset);
  if (res.last_normalized.empty()) res.last_normalized = normalize_at(res.last, x0);
  return res;
}

namespace {

using Rng = std::mt19937_64;

double draw(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec random_vec(Rng& rng, std::size_t n, double m) {
  Vec v(n);
  for (double& x : v) x = draw(rng, -m, m);
  return v;
}

// Nonnegative perturbation with roughly half of the coordinates zero.
Vec random_nonneg(Rng& rng, std::size_t n, double m) {
  Vec v(n, 0.0);
  for (double& x : v)
    if (draw(rng, 0.0, 1.0) < 0.5) x = draw(rng, 0.0, m);
  return v;
}

Vec add(std::span<const double> a, std::span<const double> b) {
  Vec out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Vec sub(std::span<const double> a, std::span<const double> b) {
  Vec out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

ConditionReport make_condition(int k, std::string name, bool declared) {
  ConditionReport c;
  c.condition = k;
  c.name = std::move(name);
  c.declared = declared;
  return c;
}

std::string pair_witness(const Vec& f, const Vec& g) {
  return "f=" + format_vector(f) + " g=" + format_vector(g);
}

}  // namespace

PropertyReport verify_properties(const ChainOperator& p, std::size_t samples, double magnitude,
                                 std::uint64_t seed, std::optional<std::size_t> n0_cap) {
  if (samples == 0) throw ValidationError("verify_properties needs at least one sample");
  if (!(magnitude > 0.0)) throw ValidationError("magnitude must be positive");
  const std::size_t n = p.dimension;
  const double tol = 1e-9 * (1.0 + magnitude);
  const auto& dec = p.declared;
  PropertyReport rep;
  rep.seed = seed;
  rep.samples = samples;
  rep.magnitude = magnitude;
  rep.n0_cap = n0_cap.value_or(n);
  Rng rng(seed);

  auto fail = [](ConditionReport& c, std::string witness, double ratio = 0.0) {
    if (c.failures++ == 0) {
      c.witness = std::move(witness);
      c.witness_ratio = ratio;
    }
  };

  ConditionReport mono = make_condition(1, "monotonicity", dec.monotone);
  ConditionReport strict = make_condition(2, "strict monotonicity", dec.strictly_monotone);
  ConditionReport uniform = make_condition(3, "uniform strict monotonicity", dec.uniformly_strictly_monotone.has_value());
  ConditionReport additive = make_condition(4, "constant additivity", dec.constant_additive);
  ConditionReport nonexp = make_condition(5, "non-expansion", dec.non_expansive);
  ConditionReport conn = make_condition(6, "connectedness", dec.connected.has_value());
  ConditionReport uconn = make_condition(7, "uniform connectedness", dec.uniformly_connected.has_value());

  double eps_estimate = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec g = random_vec(rng, n, magnitude);
    const Vec f = add(g, random_nonneg(rng, n, magnitude));
    const Vec pf = p(f), pg = p(g);

    ++mono.trials;
    for (std::size_t i = 0; i < n; ++i) {
      if (pf[i] < pg[i] - tol) {
        fail(mono, pair_witness(f, g) + " at " + std::to_string(i));
        break;
      }
    }

    ++strict.trials;
    {
      const std::size_t x = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      Vec fs = f;
      fs[x] = std::max(fs[x], g[x]) + draw(rng, 0.1, 1.0) * magnitude;
      const Vec pfs = p(fs);
      if (!(pfs[x] > pg[x])) fail(strict, pair_witness(fs, g) + " at " + std::to_string(x));
    }

    ++uniform.trials;
    {
      bool bad = false;
      for (std::size_t i = 0; i < n; ++i) {
        const double gap = f[i] - g[i];
        const double out = pf[i] - pg[i];
        if (gap > 1e-6 * magnitude) eps_estimate = std::min(eps_estimate, out / gap);
        const double need = dec.uniformly_strictly_monotone.value_or(0.0) * gap;
        if (out < need - tol) bad = true;
      }
      if (bad) fail(uniform, pair_witness(f, g));
    }

    ++additive.trials;
    {
      const double c = draw(rng, -magnitude, magnitude);
      Vec fc = f;
      for (double& v : fc) v += c;
      const Vec pfc = p(fc);
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(pfc[i] - pf[i] - c));
      if (err > tol) fail(additive, "f=" + format_vector(f) + " C=" + format_double(c), err);
    }

    ++nonexp.trials;
    {
      const Vec a = random_vec(rng, n, magnitude);
      const Vec b = random_vec(rng, n, magnitude);
      const double lhs = sup_norm(sub(p(a), p(b)));
      const double rhs = sup_norm(sub(a, b));
      if (lhs > rhs + tol) fail(nonexp, pair_witness(a, b), rhs > 0 ? lhs / rhs : 0.0);
    }
  }
  mono.passed = mono.failures == 0;
  strict.passed = strict.failures == 0;
  uniform.estimate = eps_estimate;
  uniform.passed = uniform.failures == 0 && eps_estimate > 1e-12;
  if (dec.uniformly_strictly_monotone)
    uniform.passed = uniform.passed && eps_estimate >= *dec.uniformly_strictly_monotone - tol;
  additive.passed = additive.failures == 0;
  nonexp.passed = nonexp.failures == 0;

  // Connectedness: f = g + delta 1_x (+ extra nonnegative mass), followed
  // along P^n for n up to the cap.
  const std::size_t cap = std::max<std::size_t>(1, rep.n0_cap);
  std::vector<bool> strict_ok(cap + 1, true);
  Vec eps_at(cap + 1, std::numeric_limits<double>::infinity());
  std::string first_strict_failure;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec g = random_vec(rng, n, magnitude);
    const std::size_t x = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const double delta = draw(rng, 0.1, 1.0) * magnitude;
    Vec f = g;
    f[x] += delta;
    if (s % 2 == 1) f = add(f, random_nonneg(rng, n, magnitude));
    Vec pf = f, pg = g;
    for (std::size_t k = 1; k <= cap; ++k) {
      pf = p(pf);
      pg = p(pg);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) worst = std::min(worst, pf[i] - pg[i]);
      if (!(worst > 0.0)) {
        if (strict_ok[k] && first_strict_failure.empty())
          first_strict_failure = pair_witness(f, g) + " n0=" + std::to_string(k);
        strict_ok[k] = false;
      }
      eps_at[k] = std::min(eps_at[k], worst / delta);
    }
    ++conn.trials;
    ++uconn.trials;
  }
  for (std::size_t k = 1; k <= cap; ++k) {
    if (strict_ok[k]) {
      conn.n0 = k;
      break;
    }
  }
  for (std::size_t k = 1; k <= cap; ++k) {
    if (eps_at[k] > 1e-12) {
      uconn.n0 = k;
      uconn.estimate = eps_at[k];
      break;
    }
  }
  if (dec.connected && *dec.connected <= cap) {
    conn.passed = strict_ok[*dec.connected];
  } else {
    conn.passed = conn.n0.has_value();
  }
  if (dec.uniformly_connected && dec.uniformly_connected->first <= cap) {
    const auto [k, e] = *dec.uniformly_connected;
    uconn.passed = eps_at[k] >= e - tol;
    uconn.estimate = eps_at[k];
  } else {
    uconn.passed = uconn.n0.has_value();
  }
  if (!conn.passed) {
    conn.failures = 1;
    conn.witness = first_strict_failure.empty() ? "no n0 <= " + std::to_string(cap) + " works"
                                                : first_strict_failure;
  }
  if (!uconn.passed) {
    uconn.failures = 1;
    uconn.witness = "no n0 <= " + std::to_string(cap) + " with positive epsilon_0";
  }

  rep.conditions = {mono, strict, uniform, additive, nonexp, conn, uconn};
  return rep;
}

ChainOperator extend_operator(const ChainOperator& p, double eps, FamilyProvider family) {
  if (!(eps > 0.0)) throw ValidationError("extension needs eps > 0");
  ChainOperator out;
  out.dimension = p.dimension;
  out.name = p.name + "-extended";
  out.map = [p, eps, family = std::move(family)](std::span<const double> f) {
    const auto bases = family(f);
    if (bases.empty()) throw PreconditionError("extension: no dominating family member");
    Vec best(f.size(), std::numeric_limits<double>::infinity());
    for (const Vec& v : bases) {
      double c = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < f.size(); ++i) c = std::max(c, f[i] - v[i]);
      Vec g = v;
      for (double& x : g) x += c;
      const Vec pg = p(g);
      for (std::size_t i = 0; i < f.size(); ++i)
        best[i] = std::min(best[i], pg[i] - eps * (g[i] - f[i]));
    }
    return best;
  };
  out.declared.monotone = out.declared.strictly_monotone = true;
  out.declared.uniformly_strictly_monotone = eps;
  out.declared.constant_additive = true;
  return out;
}

namespace {

struct FamilyPoint {
  long long n = 0;
  double c = 0.0;
};

// Members are (n, -n, s eps0, -s eps0) + c with s = -1 for even n, +1 for odd.
std::optional<FamilyPoint> counterexample_member(std::span<const double> f, double eps0) {
  const double c = 0.5 * (f[0] + f[1]);
  const double half = 0.5 * (f[0] - f[1]);
  const double n = std::round(half);
  const double scale = 1.0 + std::abs(f[0]) + std::abs(f[1]);
  if (std::abs(half - n) > 1e-9 * scale) return std::nullopt;
  const long long ni = static_cast<long long>(n);
  const double s = (ni % 2 == 0) ? -1.0 : 1.0;
  if (std::abs(f[2] - c - s * eps0) > 1e-9 * scale) return std::nullopt;
  if (std::abs(f[3] - c + s * eps0) > 1e-9 * scale) return std::nullopt;
  return FamilyPoint{ni, c};
}

Vec counterexample_base(long long n, double eps0) {
  const double s = (n % 2 == 0) ? -1.0 : 1.0;
  const double nd = static_cast<double>(n);
  return {nd, -nd, s * eps0, -s * eps0};
}

Vec counterexample_exact(const FamilyPoint& pt, double eps0) {
  const double s = (pt.n % 2 == 0) ? -1.0 : 1.0;
  const double nd = static_cast<double>(pt.n);
  return {pt.c + (nd + 1.0), pt.c - (nd + 1.0), pt.c - s * eps0, pt.c + s * eps0};
}

}  // namespace

Vec counterexample_start(double eps0) { return {0.0, 0.0, -eps0, eps0}; }

ChainOperator counterexample_operator(double eps0) {
  if (!(eps0 > 0.0) || eps0 >= 0.25) throw ValidationError("eps0 must lie in (0, 1/4)");
  ChainOperator on_family;
  on_family.dimension = 4;
  on_family.name = "counterexample";
  on_family.map = [eps0](std::span<const double> f) {
    const auto pt = counterexample_member(f, eps0);
    if (!pt) throw SolverError("counterexample: vector outside the family");
    return counterexample_exact(*pt, eps0);
  };
  // The kinks of c_n = max(f - base_n) bound the useful range of n.
  FamilyProvider family = [eps0](std::span<const double> f) {
    const double top = std::max(f[2], f[3]) + eps0;
    const double mid = std::round(0.5 * (f[0] - f[1]));
    const double lo = std::min({mid, std::floor(f[0] - top), std::floor(-f[1] - top)}) - 3.0;
    const double hi = std::max({mid, std::ceil(top - f[1]), std::ceil(f[0] + top)}) + 3.0;
    if (hi - lo > 1e5) throw SolverError("counterexample extension window too wide");
    std::vector<Vec> out;
    for (double n = lo; n <= hi; n += 1.0)
      out.push_back(counterexample_base(static_cast<long long>(n), eps0));
    return out;
  };
  const ChainOperator extended = extend_operator(on_family, 0.5, family);

  ChainOperator p;
  p.dimension = 4;
  p.name = "counterexample";
  p.map = [eps0, extended](std::span<const double> f) {
    if (const auto pt = counterexample_member(f, eps0)) return counterexample_exact(*pt, eps0);
    return extended(f);
  };
  p.declared.monotone = p.declared.strictly_monotone = true;
  p.declared.uniformly_strictly_monotone = 0.5;
  p.declared.constant_additive = true;
  p.declared.non_expansive = true;
  return p;
}

Vec min_family_apply(const std::vector<Matrix>& family, std::span<const double> v) {
  Vec out(v.size(), std::numeric_limits<double>::infinity());
  for (const Matrix& a : family) {
    const Vec av = a.apply(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], av[i]);
  }
  return out;
}

ChainOperator perron_frobenius_operator(const std::vector<Matrix>& family) {
  if (family.empty()) throw ValidationError("matrix family is empty");
  const std::size_t n = family.front().rows();
  for (std::size_t k = 0; k < family.size(); ++k) {
    const Matrix& a = family[k];
    if (a.rows() != n || a.cols() != n) throw ValidationError("family matrices must be N x N");
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        if (!(a(r, c) >= 0.0) || !std::isfinite(a(r, c)))
          throw ValidationError("matrix " + std::to_string(k) + " has a negative entry");
        s += a(r, c);
      }
      if (s == 0.0)
        throw ValidationError("matrix " + std::to_string(k) + " has a zero row " +
                              std::to_string(r));
    }
  }
  ChainOperator p;
  p.dimension = n;
  p.name = "perron-frobenius";
  // log (A e^f)_i as a per-row log-sum-exp, finite for any finite f.
  p.map = [family](std::span<const double> f) {
    Vec out(f.size(), std::numeric_limits<double>::infinity());
    for (const Matrix& a : family) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < f.size(); ++j)
          if (a(i, j) > 0.0) top = std::max(top, f[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j)
          if (a(i, j) > 0.0) s += a(i, j) * std::exp(f[j] - top);
        out[i] = std::min(out[i], top + std::log(s));
      }
    }
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = 0.5 * (f[i] + out[i]);
    return out;
  };
  p.declared.monotone = p.declared.strictly_monotone = true;
  p.declared.uniformly_strictly_monotone = 0.5;
  p.declared.constant_additive = true;
  p.declared.non_expansive = true;
  return p;
}

}  // namespace nlmc
