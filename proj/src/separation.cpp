#include "nlmc/separation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>

#include "nlmc/curvature.hpp"
#include "nlmc/error.hpp"
#include "nlmc/format.hpp"
#include "nlmc/plaplace.hpp"
#include "nlmc/transport.hpp"

namespace nlmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* region_name(Region r) {
  switch (r) {
    case Region::X:
      return "X";
    case Region::K:
      return "K";
    case Region::Y:
      return "Y";
  }
  return "?";
}

}  // namespace

PartitionXKY::PartitionXKY(std::vector<Region> labels) : labels_(std::move(labels)) {
  for (std::size_t v = 0; v < labels_.size(); ++v) {
    switch (labels_[v]) {
      case Region::X:
        x_.push_back(v);
        break;
      case Region::K:
        k_.push_back(v);
        break;
      case Region::Y:
        y_.push_back(v);
        break;
    }
  }
  if (k_.empty()) throw ValidationError("partition needs a nonempty K");
}

PartitionXKY PartitionXKY::from_sets(std::size_t n, const std::vector<std::size_t>& x,
                                     const std::vector<std::size_t>& k,
                                     const std::vector<std::size_t>& y) {
  std::vector<std::optional<Region>> labels(n);
  auto put = [&](const std::vector<std::size_t>& ids, Region r) {
    for (std::size_t v : ids) {
      if (v >= n) throw ValidationError("partition vertex " + std::to_string(v) + " out of range");
      if (labels[v]) {
        throw ValidationError("vertex " + std::to_string(v) + " is in both " +
                              region_name(*labels[v]) + " and " + region_name(r));
      }
      labels[v] = r;
    }
  };
  put(x, Region::X);
  put(k, Region::K);
  put(y, Region::Y);
  std::vector<Region> out(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (!labels[v]) throw ValidationError("vertex " + std::to_string(v) + " is not in X, K or Y");
    out[v] = *labels[v];
  }
  return PartitionXKY(std::move(out));
}

std::optional<std::size_t> PartitionXKY::k_index(std::size_t v) const {
  const auto it = std::lower_bound(k_.begin(), k_.end(), v);
  if (it == k_.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - k_.begin());
}

void PartitionXKY::validate(const WeightedGraph& g) const {
  if (g.size() != size()) {
    throw ValidationError("partition has " + std::to_string(size()) + " vertices, graph has " +
                          std::to_string(g.size()));
  }
  for (const Edge& e : g.edges()) {
    const Region a = labels_[e.u], b = labels_[e.v];
    if ((a == Region::X && b == Region::Y) || (a == Region::Y && b == Region::X))
      throw ValidationError("edge " + e.label() + " joins X and Y");
  }
}

bool PartitionXKY::separates(const DistanceMatrix& d, double tolerance) const {
  for (std::size_t a : x_) {
    for (std::size_t b : y_) {
      double best = kInf;
      for (std::size_t z : k_)
        if (d.finite(a, z) && d.finite(z, b)) best = std::min(best, d(a, z) + d(z, b));
      if (!d.finite(a, b)) {
        if (best < kInf) return false;
        continue;
      }
      if (std::abs(best - d(a, b)) > tolerance * std::max(1.0, d(a, b))) return false;
    }
  }
  return true;
}

double lip1_violation(const PartitionXKY& part, const DistanceMatrix& d,
                      std::span<const double> f_on_k) {
  const auto& k = part.k();
  if (f_on_k.size() != k.size()) throw ValidationError("function on K has the wrong size");
  double worst = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = 0; j < k.size(); ++j)
      if (i != j && d.finite(k[i], k[j]))
        worst = std::max(worst, f_on_k[j] - f_on_k[i] - d(k[i], k[j]));
  return worst;
}

namespace {

double lip_on_k(const PartitionXKY& part, const DistanceMatrix& d, std::span<const double> f) {
  const auto& k = part.k();
  double best = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = i + 1; j < k.size(); ++j)
      if (d.finite(k[i], k[j])) best = std::max(best, std::abs(f[j] - f[i]) / d(k[i], k[j]));
  return best;
}

void require_lip1(const PartitionXKY& part, const DistanceMatrix& d, std::span<const double> f,
                  double tolerance) {
  const auto& k = part.k();
  if (f.size() != k.size()) {
    throw ValidationError("function on K needs " + std::to_string(k.size()) + " values, got " +
                          std::to_string(f.size()));
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = 0; j < k.size(); ++j) {
      if (i == j || !d.finite(k[i], k[j])) continue;
      if (f[j] - f[i] > d(k[i], k[j]) + tolerance) {
        throw ValidationError("f is not in Lip(1,K): f(" + std::to_string(k[j]) + ") - f(" +
                              std::to_string(k[i]) + ") = " + format_double(f[j] - f[i]) +
                              " > d = " + format_double(d(k[i], k[j])));
      }
    }
  }
}

}  // namespace

namespace {

// The extension formula without the Lip(1, K) check.
Vec extend(const PartitionXKY& part, const DistanceMatrix& d, std::span<const double> f_on_k) {
  const auto& k = part.k();
  Vec out(part.size(), 0.0);
  for (std::size_t v = 0; v < part.size(); ++v) {
    const Region r = part.region(v);
    if (r == Region::K) {
      out[v] = f_on_k[*part.k_index(v)];
      continue;
    }
    double best = r == Region::Y ? kInf : -kInf;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (!d.finite(v, k[i])) continue;
      if (r == Region::Y) best = std::min(best, f_on_k[i] + d(v, k[i]));
      else best = std::max(best, f_on_k[i] - d(v, k[i]));
    }
    if (!std::isfinite(best))
      throw ValidationError("vertex " + std::to_string(v) + " cannot reach K");
    out[v] = best;
  }
  return out;
}

}  // namespace

Vec lipschitz_extend(const PartitionXKY& part, const DistanceMatrix& d,
                     std::span<const double> f_on_k, double tolerance) {
  if (d.size() != part.size()) throw ValidationError("metric and partition sizes differ");
  require_lip1(part, d, f_on_k, tolerance);
  return extend(part, d, f_on_k);
}

Vec restrict_to_k(const PartitionXKY& part, std::span<const double> f) {
  if (f.size() != part.size()) throw ValidationError("function on V has the wrong size");
  Vec out;
  out.reserve(part.k().size());
  for (std::size_t v : part.k()) out.push_back(f[v]);
  return out;
}

namespace {

std::size_t base_index(const PartitionXKY& part, std::size_t x0) {
  const auto idx = part.k_index(x0);
  if (!idx) throw ValidationError("base vertex " + std::to_string(x0) + " is not in K");
  return *idx;
}

struct Pattern {
  double constant = 0.0;
  double spread = 0.0;
  double x_margin = kInf;
  double y_margin = -kInf;
  bool holds = false;
};

Pattern sign_pattern(const PartitionXKY& part, std::span<const double> lap, double slack) {
  Pattern out;
  double lo = kInf, hi = -kInf;
  for (std::size_t v : part.k()) {
    lo = std::min(lo, lap[v]);
    hi = std::max(hi, lap[v]);
  }
  out.constant = 0.5 * (lo + hi);
  out.spread = hi - lo;
  for (std::size_t v : part.x()) out.x_margin = std::min(out.x_margin, lap[v] - out.constant);
  for (std::size_t v : part.y()) out.y_margin = std::max(out.y_margin, lap[v] - out.constant);
  out.holds = out.x_margin >= -slack && out.y_margin <= slack;
  return out;
}

void apply_pattern(SeparationResult& res, const PartitionXKY& part, double slack) {
  const Pattern pat = sign_pattern(part, res.laplacian, slack);
  res.constant = pat.constant;
  res.spread_on_k = pat.spread;
  res.x_margin = pat.x_margin;
  res.y_margin = pat.y_margin;
  res.sign_pattern = pat.holds;
}

// Runs the restricted chain and tracks Lip on K of every normalized iterate.
IterationResult run_restricted(const ChainOperator& chain, const PartitionXKY& part,
                               const DistanceMatrix& d, Vec f0, std::size_t x0,
                               const SeparationOptions& opts, double& max_lip) {
  IterationOptions io;
  io.tolerance = opts.tolerance;
  io.max_iterations = opts.max_iterations;
  io.observer = [&](const TraceRow&, std::span<const double> normalized) {
    max_lip = std::max(max_lip, lip_on_k(part, d, normalized));
  };
  max_lip = std::max(max_lip, lip_on_k(part, d, f0));
  return iterate_normalized(chain, std::move(f0), base_index(part, x0), io);
}

DeclaredProperties chain_properties() {
  DeclaredProperties p;
  p.monotone = true;
  p.strictly_monotone = true;
  p.constant_additive = true;
  p.non_expansive = true;
  return p;
}

}  // namespace

ChainOperator laplacian_chain(const WeightedGraph& g, double eps) {
  const std::size_t n = g.size();
  Matrix a = Matrix::identity(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y : g.neighbors(x)) {
      const double c = eps * g.weight(x, y) / g.measure(x);
      a(x, y) += c;
      a(x, x) -= c;
    }
  }
  return linear_operator(std::move(a), "id+eps*Laplacian");
}

ChainOperator resolvent_chain(const WeightedGraph& g, double p, double eps) {
  ChainOperator op;
  op.dimension = g.size();
  op.name = "resolvent p=" + format_double(p);
  op.declared = chain_properties();
  op.map = [g, p, eps](std::span<const double> f) { return resolvent(g, f, p, eps).g; };
  return op;
}

SeparationResult separation_flow_linear(const WeightedGraph& g, const PartitionXKY& part,
                                        std::optional<double> eps_in, Vec f0, std::size_t x0,
                                        const SeparationOptions& opts) {
  part.validate(g);
  const DistanceMatrix d = shortest_path_metric(g, opts.execution);
  require_lip1(part, d, f0, 1e-12);
  const double max_deg = g.max_degree();
  const double eps = eps_in ? *eps_in : (max_deg > 0.0 ? 0.5 / max_deg : 0.5);
  if (!(eps > 0.0) || !(eps * max_deg < 1.0)) {
    throw PreconditionError("eps = " + format_double(eps) +
                            " must lie in (0, 1/max deg) so that id + eps Delta has a positive diagonal");
  }

  SeparationResult res;
  res.epsilon = eps;
  res.curvature_waived = opts.waive_curvature;
  res.curvature_min = kInf;
  for (const Edge& e : g.edges())
    res.curvature_min = std::min(res.curvature_min, kappa_alpha(g, d, e.u, e.v, eps));
  if (!opts.waive_curvature && res.curvature_min < -1e-12) {
    throw PreconditionError("negative curvature " + format_double(res.curvature_min) +
                            " of the eps-lazy walk; the separation flow needs kappa >= 0");
  }

  const ChainOperator lap = laplacian_chain(g, eps);
  ChainOperator chain;
  chain.dimension = part.k().size();
  chain.name = "separation-linear";
  chain.declared = chain_properties();
  chain.map = [&](std::span<const double> f) {
    return restrict_to_k(part, lap(extend(part, d, f)));
  };

  const auto it = run_restricted(chain, part, d, std::move(f0), x0, opts, res.max_lip_on_k);
  res.status = it.status;
  res.iterations = it.iterations;
  res.trace = it.trace;
  res.g = it.limit ? *it.limit : it.last_normalized;
  res.sg = extend(part, d, res.g);
  res.laplacian = laplacian_apply(g, res.sg);
  apply_pattern(res, part, opts.sign_slack);
  return res;
}

std::vector<double> default_epsilon_schedule(double eps, std::size_t steps) {
  std::vector<double> out;
  for (std::size_t k = 0; k < steps; ++k) out.push_back(std::ldexp(eps, -static_cast<int>(k)));
  return out;
}

PSeparationResult separation_flow_p(const WeightedGraph& g, const PartitionXKY& part, double p,
                                    Vec f0, std::size_t x0, const SeparationOptions& opts,
                                    std::vector<double> schedule) {
  part.validate(g);
  if (schedule.empty()) throw ValidationError("epsilon schedule is empty");
  for (double e : schedule)
    if (!(e > 0.0)) throw ValidationError("epsilon schedule entries must be positive");
  const auto phi = PhiSpec::power(p);
  const DistanceMatrix d0 = shortest_path_metric(g.with_unit_lengths(), opts.execution);
  require_lip1(part, d0, f0, 1e-12);

  PSeparationResult res;
  res.p = p;
  res.curvature_waived = opts.waive_curvature;
  res.curvature_min = g.edges().empty() ? kInf : min_modified_curvature(g, phi);
  if (!opts.waive_curvature && res.curvature_min < -1e-12) {
    throw PreconditionError("negative modified curvature " + format_double(res.curvature_min) +
                            "; the p-separation flow needs k_phi >= 0");
  }

  Vec start = std::move(f0);
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const double eps = schedule[s];
    ChainOperator chain;
    chain.dimension = part.k().size();
    chain.name = "separation-resolvent";
    chain.declared = chain_properties();
    chain.map = [&](std::span<const double> f) {
      return restrict_to_k(part, resolvent(g, extend(part, d0, f), p, eps).g);
    };
    // g_sub = (h - S f_tilde) / eps, so the fixed point is needed to tolerance * eps.
    SeparationOptions step_opts = opts;
    step_opts.tolerance = opts.tolerance * std::min(1.0, eps);
    double lip = 0.0;
    const auto it = run_restricted(chain, part, d0, start, x0, step_opts, lip);
    res.max_lip_on_k = std::max(res.max_lip_on_k, lip);
    if (s == 0) res.trace = it.trace;

    PSeparationStep step;
    step.epsilon = eps;
    step.status = it.status;
    step.iterations = it.iterations;
    step.f_tilde = it.limit ? *it.limit : it.last_normalized;
    const Vec sf = extend(part, d0, step.f_tilde);
    const auto sol = resolvent(g, sf, p, eps);
    step.h = sol.g;
    const Vec sh = extend(part, d0, restrict_to_k(part, step.h));
    step.gap = sup_distance(step.h, sh);
    start = step.f_tilde;

    if (s + 1 == schedule.size()) {
      res.h = step.h;
      if (p == 1.0) {
        res.selection = sol.selection;
        res.g_sub = p1_laplacian_value(g, sol.selection);
        res.subgradient_member = p1_membership(g, res.h, res.g_sub, res.selection, 1e-9).member;
      } else {
        res.g_sub = p_laplacian(g, res.h, p);
        Vec alt(res.h.size());
        for (std::size_t v = 0; v < alt.size(); ++v) alt[v] = (res.h[v] - sf[v]) / eps;
        res.subgradient_member = sup_distance(alt, res.g_sub) <= 1e-7;
      }
    }
    res.steps.push_back(std::move(step));
  }

  res.status = IterationStatus::converged;
  for (const auto& st : res.steps)
    if (st.status != IterationStatus::converged) res.status = st.status;

  const Pattern pat = sign_pattern(part, res.g_sub, opts.sign_slack);
  res.constant = pat.constant;
  res.spread_on_k = pat.spread;
  res.x_margin = pat.x_margin;
  res.y_margin = pat.y_margin;
  res.sign_pattern = pat.holds;

  res.c_bound = 2.0 * g.max_degree();
  std::vector<std::pair<double, double>> logs;
  for (const auto& st : res.steps) {
    res.fitted_c = std::max(res.fitted_c, st.gap / st.epsilon);
    if (st.gap > 0.0) logs.emplace_back(std::log(st.epsilon), std::log(st.gap));
  }
  res.linear_decay = res.fitted_c <= res.c_bound * (1.0 + 1e-9) + 1e-12;
  if (logs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (const auto& [a, b] : logs) {
      mx += a;
      my += b;
    }
    mx /= static_cast<double>(logs.size());
    my /= static_cast<double>(logs.size());
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [a, b] : logs) {
      sxy += (a - mx) * (b - my);
      sxx += (a - mx) * (a - mx);
    }
    if (sxx > 0.0) res.decay_slope = sxy / sxx;
  }
  return res;
}

double lipschitz_finite(std::span<const double> f, const DistanceMatrix& d) {
  if (f.size() != d.size()) throw ValidationError("function and metric sizes differ");
  double best = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j)
      if (d.finite(i, j)) best = std::max(best, std::abs(f[j] - f[i]) / d(i, j));
  return best;
}

namespace {

// 1 - max W(A_x, A_y) / d(x, y) for a row-stochastic matrix; nullopt otherwise.
std::optional<double> exact_linear_ric(const Matrix& a, const DistanceMatrix& d) {
  const std::size_t n = a.rows();
  std::vector<ProbMeasure> rows;
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<std::size_t> support;
    Vec mass;
    double sum = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (a(x, y) < 0.0) return std::nullopt;
      if (a(x, y) > 0.0) {
        support.push_back(y);
        mass.push_back(a(x, y));
        sum += a(x, y);
      }
    }
    if (std::abs(sum - 1.0) > 1e-12) return std::nullopt;
    for (double& m : mass) m /= sum;
    rows.emplace_back(std::move(support), std::move(mass));
  }
  double worst = 0.0;
  try {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y)
        if (d.finite(x, y)) worst = std::max(worst, wasserstein(rows[x], rows[y], d).cost / d(x, y));
  } catch (const ValidationError&) {
    return std::nullopt;
  }
  return 1.0 - worst;
}

// Feasible interval of f(v) keeping Lip(f) <= r with the other values fixed.
std::pair<double, double> coordinate_range(const Vec& f, const DistanceMatrix& d, std::size_t v,
                                           double r) {
  double lo = -kInf, hi = kInf;
  for (std::size_t z = 0; z < f.size(); ++z) {
    if (z == v || !d.finite(v, z)) continue;
    lo = std::max(lo, f[z] - r * d(v, z));
    hi = std::min(hi, f[z] + r * d(v, z));
  }
  return {lo, hi};
}

struct Sample {
  double value = -kInf;
  Vec f;
};

Sample ascend(const ChainOperator& p, const DistanceMatrix& d, double r, Vec f,
              std::size_t steps) {
  const std::size_t n = f.size();
  Sample best{lipschitz_finite(p(f), d), f};
  std::size_t since_gain = 0;
  for (std::size_t s = 0; s < steps && n > 0 && since_gain < n; ++s) {
    const std::size_t v = s % n;
    auto [lo, hi] = coordinate_range(best.f, d, v, r);
    const double cur = best.f[v];
    if (!std::isfinite(lo)) lo = cur - r;
    if (!std::isfinite(hi)) hi = cur + r;
    bool gained = false;
    for (double cand : {lo, hi, std::clamp(cur - r / 16.0, lo, hi), std::clamp(cur + r / 16.0, lo, hi)}) {
      if (cand == best.f[v]) continue;
      Vec trial = best.f;
      trial[v] = cand;
      const double val = lipschitz_finite(p(trial), d);
      if (val > best.value + 1e-15 * (1.0 + best.value)) {
        best.value = val;
        best.f = std::move(trial);
        gained = true;
      }
    }
    since_gain = gained ? 0 : since_gain + 1;
  }
  return best;
}

}  // namespace

RicEstimate ric_r(const ChainOperator& p, const DistanceMatrix& d, double r,
                  const RicOptions& opts) {
  if (!(r > 0.0)) throw ValidationError("r must be positive");
  if (p.dimension != d.size()) throw ValidationError("operator and metric sizes differ");
  const std::size_t n = d.size();
  const double diam = n > 0 ? d.max_finite() : 0.0;

  // Starting points: +-r d(z, .) for every z, then seeded random r-Lipschitz
  // functions (McShane envelopes of random values).
  std::vector<Vec> starts;
  for (std::size_t z = 0; z < n; ++z) {
    for (double sign : {1.0, -1.0}) {
      Vec f(n, 0.0);
      for (std::size_t v = 0; v < n; ++v)
        if (d.finite(z, v)) f[v] = sign * r * d(z, v);
      starts.push_back(std::move(f));
    }
  }
  for (std::size_t s = 0; s < opts.samples; ++s) {
    std::seed_seq seq{static_cast<std::uint64_t>(opts.seed), static_cast<std::uint64_t>(s)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(0.0, r * std::max(diam, 1.0));
    Vec v(n);
    for (double& x : v) x = u(rng);
    Vec f(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      double best = kInf;
      for (std::size_t z = 0; z < n; ++z)
        if (d.finite(x, z)) best = std::min(best, v[z] + r * d(x, z));
      f[x] = best;
    }
    starts.push_back(std::move(f));
  }

  std::vector<Sample> results(starts.size());
  if (opts.execution == Execution::serial) {
    for (std::size_t i = 0; i < starts.size(); ++i)
      results[i] = ascend(p, d, r, starts[i], opts.ascent_steps);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < starts.size(); ++i) {
      try {
        results[i] = ascend(p, d, r, starts[i], opts.ascent_steps);
      } catch (...) {
#pragma omp critical(nlmc_ric_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  // First strict maximum, so the witness does not depend on thread timing.
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].value > results[best].value) best = i;

  RicEstimate out;
  out.r = r;
  out.sampled = results.empty() ? 1.0 : 1.0 - results[best].value / r;
  if (!results.empty()) out.witness = results[best].f;
  if (p.linear) out.exact = exact_linear_ric(*p.linear, d);
  out.upper = out.sampled;
  out.rigorous = out.exact.has_value();
  out.lower = out.exact ? std::min(*out.exact, out.sampled) : out.sampled;
  return out;
}

GenericSeparationResult separation_flow_generic(const ChainOperator& p, const PartitionXKY& part,
                                                const DistanceMatrix& d, Vec f0, std::size_t x0,
                                                const GenericSeparationOptions& opts) {
  if (p.dimension != part.size() || d.size() != part.size())
    throw ValidationError("operator, metric and partition sizes differ");
  if (!part.separates(d)) throw PreconditionError("K does not separate X from Y in the metric");
  require_lip1(part, d, f0, 1e-12);

  GenericSeparationResult res;
  res.curvature_waived = opts.waive_curvature;
  res.ric = ric_r(p, d, 1.0, opts.ric);
  res.curvature_min = res.ric.lower;
  if (!opts.waive_curvature && res.ric.lower < -opts.tolerance) {
    throw PreconditionError("Ric_1 = " + format_double(res.ric.lower) +
                            " < 0; the separation flow needs Ric_1 >= 0");
  }

  ChainOperator chain;
  chain.dimension = part.k().size();
  chain.name = "separation-generic";
  chain.declared = chain_properties();
  chain.map = [&](std::span<const double> f) {
    return restrict_to_k(part, p(extend(part, d, f)));
  };
  const auto it = run_restricted(chain, part, d, std::move(f0), x0, opts, res.max_lip_on_k);
  res.status = it.status;
  res.iterations = it.iterations;
  res.trace = it.trace;
  res.g = it.limit ? *it.limit : it.last_normalized;
  res.sg = extend(part, d, res.g);
  const Vec psg = p(res.sg);
  res.laplacian.resize(res.sg.size());
  for (std::size_t v = 0; v < res.sg.size(); ++v) res.laplacian[v] = psg[v] - res.sg[v];
  apply_pattern(res, part, opts.sign_slack);
  return res;
}

}  // namespace nlmc
