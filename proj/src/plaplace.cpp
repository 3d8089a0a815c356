#include "nlmc/plaplace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nlmc/error.hpp"
#include "nlmc/format.hpp"
#include "nlmc/lp.hpp"

namespace nlmc {

namespace {

double sgn(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

void require_size(const WeightedGraph& g, std::span<const double> f) {
  if (f.size() != g.size()) {
    throw ValidationError("vertex function has " + std::to_string(f.size()) +
                          " entries, graph has " + std::to_string(g.size()));
  }
  for (double v : f)
    if (!std::isfinite(v)) throw ValidationError("vertex function has a non-finite entry");
}

void require_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("p must be >= 1, got " + format_double(p));
}

// Hessian entries are capped so that the Newton system stays finite where
// psi'' blows up (|t|^{p-2} with p < 2 at t = 0).
constexpr double kCurvatureCap = 1e12;

struct PowerPotential {
  double p;
  double value(double t) const { return std::pow(std::abs(t), p) / p; }
  double d1(double t) const { return sgn(t) * std::pow(std::abs(t), p - 1.0); }
  double d2(double t) const {
    if (p == 2.0) return 1.0;
    if (t == 0.0) return p > 2.0 ? 0.0 : kCurvatureCap;
    return std::min(kCurvatureCap, (p - 1.0) * std::pow(std::abs(t), p - 2.0));
  }
};

// ((t^2 + s^2)^{p/2} - s^p) / p, a C^2 approximation of |t|^p / p.
struct SmoothedPowerPotential {
  double p;
  double s;
  double value(double t) const {
    return (std::pow(t * t + s * s, 0.5 * p) - std::pow(s, p)) / p;
  }
  double d1(double t) const { return std::pow(t * t + s * s, 0.5 * p - 1.0) * t; }
  double d2(double t) const {
    const double q = t * t + s * s;
    return std::min(kCurvatureCap,
                    std::pow(q, 0.5 * p - 2.0) * ((p - 1.0) * t * t + s * s));
  }
};

struct CustomPotential {
  const PhiSpec* phi;
  double value(double t) const { return phi->antiderivative(t); }
  double d1(double t) const { return (*phi)(t); }
  double d2(double t) const {
    const double v = phi->derivative(t);
    return std::isfinite(v) ? std::clamp(v, 0.0, kCurvatureCap) : kCurvatureCap;
  }
};

struct EdgeData {
  std::size_t u, v;
  double w;
};

std::vector<EdgeData> edge_data(const WeightedGraph& g) {
  std::vector<EdgeData> out;
  for (const Edge& e : g.edges()) out.push_back({e.u, e.v, g.weight(e.u, e.v)});
  return out;
}

struct NewtonOutcome {
  Vec g;
  double residual = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
};

// Residual g - eps Delta_psi' g - f per vertex.
template <class Potential>
Vec residual_vector(const WeightedGraph& g, const std::vector<EdgeData>& edges,
                    std::span<const double> f, double eps, const Potential& pot,
                    std::span<const double> x) {
  Vec flux(x.size(), 0.0);
  for (const auto& e : edges) {
    const double q = e.w * pot.d1(x[e.v] - x[e.u]);
    flux[e.u] += q;
    flux[e.v] -= q;
  }
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - f[i] - eps * flux[i] / g.measure(i);
  return r;
}

template <class Potential>
double objective(const WeightedGraph& g, const std::vector<EdgeData>& edges,
                 std::span<const double> f, double eps, const Potential& pot,
                 std::span<const double> x) {
  long double s = 0.0L;
  for (const auto& e : edges) s += e.w * pot.value(x[e.v] - x[e.u]);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - f[i];
    s += g.measure(i) * d * d / (2.0 * eps);
  }
  return static_cast<double>(s);
}

// Damped Newton on the strongly convex objective with Armijo backtracking.
// Near the optimum the objective decrease drops below rounding, so a step
// that shrinks the residual is accepted as well.
template <class Potential>
NewtonOutcome newton_prox(const WeightedGraph& g, const std::vector<EdgeData>& edges,
                          std::span<const double> f, double eps, const Potential& pot,
                          Vec x, double tol, std::size_t max_steps) {
  const std::size_t n = x.size();
  NewtonOutcome out;
  Vec r = residual_vector(g, edges, f, eps, pot, x);
  double res = sup_norm(r);
  double fx = objective(g, edges, f, eps, pot, x);
  std::size_t step = 0;
  while (res > tol && step < max_steps) {
    ++step;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    Eigen::VectorXd grad(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      h(ii, ii) = g.measure(i) / eps;
      grad(ii) = g.measure(i) * r[i] / eps;
    }
    for (const auto& e : edges) {
      const double c = e.w * pot.d2(x[e.v] - x[e.u]);
      const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
      h(u, u) += c;
      h(v, v) += c;
      h(u, v) -= c;
      h(v, u) -= c;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) throw SolverError("resolvent Hessian factorization failed");
    const Eigen::VectorXd dir = -llt.solve(grad);
    const double slope = grad.dot(dir);

    double t = 1.0;
    bool accepted = false;
    Vec trial(n);
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + t * dir(static_cast<Eigen::Index>(i));
      const double ft = objective(g, edges, f, eps, pot, trial);
      if (ft <= fx + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      Vec rt = residual_vector(g, edges, f, eps, pot, trial);
      if (sup_norm(rt) < res && ft <= fx + 1e-12 * (1.0 + std::abs(fx))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    x = trial;
    fx = objective(g, edges, f, eps, pot, x);
    r = residual_vector(g, edges, f, eps, pot, x);
    res = sup_norm(r);
  }
  out.g = std::move(x);
  out.residual = res;
  out.steps = step;
  return out;
}

double value_range(std::span<const double> f) {
  if (f.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  return *hi - *lo;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

double p1_residual(const WeightedGraph& g, std::span<const double> f, double eps,
                   std::span<const double> x, std::span<const double> selection) {
  const Vec lap = p1_laplacian_value(g, selection);
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(x[i] - eps * lap[i] - f[i]));
  return r;
}

// Exact p = 1 solution from a smoothed approximation: vertices joined by
// edges with gaps below `merge` share one value, the remaining edges carry
// the sign of the approximation, and the flat edges get a selection from a
// feasibility LP. Returns nullopt when the guessed structure is inconsistent.
std::optional<ResolventSolution> polish_p1(const WeightedGraph& g, std::span<const double> f,
                                           double eps, std::span<const double> approx,
                                           double merge) {
  const std::size_t n = g.size();
  const auto& edges = g.edges();
  UnionFind uf(n);
  for (const Edge& e : edges)
    if (std::abs(approx[e.u] - approx[e.v]) <= merge) uf.unite(e.u, e.v);

  std::vector<double> sigma(edges.size(), 0.0);  // sign for f_uv on cut edges
  std::vector<bool> flat(edges.size(), false);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    if (uf.find(e.u) == uf.find(e.v)) flat[k] = true;
    else sigma[k] = sgn(approx[e.v] - approx[e.u]);
  }

  // Cluster value: m-weighted mean of f plus the boundary pull.
  Vec mass(n, 0.0), pull(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) pull[uf.find(x)] += g.measure(x) * f[x];
  for (std::size_t x = 0; x < n; ++x) mass[uf.find(x)] += g.measure(x);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (flat[k]) continue;
    const Edge& e = edges[k];
    const double w = g.weight(e.u, e.v);
    pull[uf.find(e.u)] += eps * w * sigma[k];
    pull[uf.find(e.v)] -= eps * w * sigma[k];
  }
  Vec x(n);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t root = uf.find(v);
    x[v] = pull[root] / mass[root];
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (flat[k]) continue;
    if (sgn(x[edges[k].v] - x[edges[k].u]) != sigma[k]) return std::nullopt;
  }

  ResolventSolution sol;
  sol.selection.assign(edges.size(), 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (!flat[k]) sol.selection[k] = sigma[k];

  // Flat edges: s_k = f_uv + 1 in [0, 2] balancing each vertex.
  std::vector<std::size_t> flat_ids;
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (flat[k]) flat_ids.push_back(k);
  if (!flat_ids.empty()) {
    Vec need(n, 0.0);  // required sum_y w f_xy over flat edges
    for (std::size_t v = 0; v < n; ++v) need[v] = g.measure(v) * (x[v] - f[v]) / eps;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (flat[k]) continue;
      const Edge& e = edges[k];
      const double w = g.weight(e.u, e.v);
      need[e.u] -= w * sigma[k];
      need[e.v] += w * sigma[k];
    }
    lp::LinearProgram prog;
    prog.num_vars = flat_ids.size();
    prog.objective.assign(flat_ids.size(), 0.0);
    std::vector<bool> dropped(n, false);  // one redundant balance row per cluster
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t root = uf.find(v);
      if (!dropped[root]) {
        dropped[root] = true;
        continue;
      }
      Vec row(flat_ids.size(), 0.0);
      double rhs = need[v];
      for (std::size_t i = 0; i < flat_ids.size(); ++i) {
        const Edge& e = edges[flat_ids[i]];
        const double w = g.weight(e.u, e.v);
        if (e.u == v) {
          row[i] = w;
          rhs += w;
        } else if (e.v == v) {
          row[i] = -w;
          rhs -= w;
        }
      }
      if (std::all_of(row.begin(), row.end(), [](double c) { return c == 0.0; })) continue;
      prog.add(std::move(row), lp::Relation::equal, rhs);
    }
    for (std::size_t i = 0; i < flat_ids.size(); ++i) {
      Vec row(flat_ids.size(), 0.0);
      row[i] = 1.0;
      prog.add(std::move(row), lp::Relation::less_equal, 2.0);
    }
    const auto res = lp::solve(prog);
    if (res.status != lp::Status::optimal) return std::nullopt;
    for (std::size_t i = 0; i < flat_ids.size(); ++i)
      sol.selection[flat_ids[i]] = std::clamp(res.x[i] - 1.0, -1.0, 1.0);
  }
  sol.g = std::move(x);
  sol.residual = p1_residual(g, f, eps, sol.g, sol.selection);
  return sol;
}

ResolventSolution resolvent_p1(const WeightedGraph& g, std::span<const double> f, double eps,
                               const ResolventOptions& opts) {
  const auto edges = edge_data(g);
  const double range = value_range(f);
  const double scale = std::max(1.0, sup_norm(f));
  const double tol = opts.residual_tolerance * scale;
  ResolventSolution best;
  best.residual = std::numeric_limits<double>::infinity();

  Vec x(f.begin(), f.end());
  std::size_t steps = 0;
  for (int k = 0; k <= 10; ++k) {
    const double s = range * std::pow(10.0, -k);
    const SmoothedPowerPotential pot{1.0, s};
    auto out = newton_prox(g, edges, f, eps, pot, std::move(x), 1e-3 * tol, opts.max_newton_steps);
    x = std::move(out.g);
    steps += out.steps;
    // Try the exact polish at several merge widths around the smoothing scale.
    if (k >= 3) {
      for (double merge : {10.0 * s, 100.0 * s, 1e3 * s, 1e4 * s, s, 0.1 * s}) {
        auto sol = polish_p1(g, f, eps, x, merge);
        if (sol && sol->residual <= tol) {
          sol->newton_steps = steps;
          return *sol;
        }
        if (sol && sol->residual < best.residual) best = *sol;
      }
    }
  }
  throw ConvergenceError("p = 1 resolvent did not reach residual " + format_double(tol) +
                         " (best " + format_double(best.residual) + ")");
}

ResolventSolution finish(NewtonOutcome out, double tol, const std::string& what) {
  if (!(out.residual <= tol)) {
    throw ConvergenceError(what + " resolvent did not reach residual " + format_double(tol) +
                           " (got " + format_double(out.residual) + ")");
  }
  ResolventSolution sol;
  sol.g = std::move(out.g);
  sol.residual = out.residual;
  sol.newton_steps = out.steps;
  return sol;
}

// J_eps fixes constants, with the zero selection on every edge.
ResolventSolution constant_solution(const WeightedGraph& g, std::span<const double> f) {
  ResolventSolution sol;
  sol.g.assign(f.begin(), f.end());
  sol.selection.assign(g.edges().size(), 0.0);
  return sol;
}

void require_resolvent_inputs(const WeightedGraph& g, std::span<const double> f, double eps) {
  require_size(g, f);
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps must be positive");
}

}  // namespace

PhiSpec PhiSpec::power(double p) {
  require_p(p);
  PhiSpec s;
  s.kind = Kind::p_power;
  s.p = p;
  s.name = "p=" + format_double(p);
  s.shape = phi_shape_for_p(p);
  s.phi = [p](double t) { return p == 1.0 ? sgn(t) : sgn(t) * std::pow(std::abs(t), p - 1.0); };
  s.dphi = [p](double t) {
    if (p == 1.0) return t == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    if (p == 2.0) return 1.0;
    if (t == 0.0) return p > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (p - 1.0) * std::pow(std::abs(t), p - 2.0);
  };
  s.psi = [p](double t) { return std::pow(std::abs(t), p) / p; };
  return s;
}

PhiSpec PhiSpec::custom(std::string name, std::function<double(double)> phi, PhiShape shape,
                        std::function<double(double)> dphi, std::function<double(double)> psi) {
  if (!phi) throw ValidationError("custom phi needs a function");
  PhiSpec s;
  s.kind = Kind::custom;
  s.name = std::move(name);
  s.shape = shape;
  s.phi = std::move(phi);
  s.dphi = std::move(dphi);
  s.psi = std::move(psi);
  s.validate();
  return s;
}

double PhiSpec::operator()(double t) const { return phi(t); }

double PhiSpec::derivative(double t) const {
  if (dphi) return dphi(t);
  const double h = 1e-6 * std::max(1.0, std::abs(t));
  return (phi(t + h) - phi(t - h)) / (2.0 * h);
}

double PhiSpec::antiderivative(double t) const {
  if (psi) return psi(t);
  // Composite Simpson; phi is monotone, so this is accurate enough to act as
  // a line-search merit.
  constexpr int intervals = 256;
  const double h = t / intervals;
  double s = phi(0.0) + phi(t);
  for (int i = 1; i < intervals; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * phi(i * h);
  return s * h / 3.0;
}

void PhiSpec::validate() const {
  if (kind == Kind::p_power) {
    require_p(p);
    return;
  }
  constexpr int samples = 64;
  constexpr double top = 4.0;
  double prev = phi(0.0);
  if (std::abs(prev) > 1e-12) throw ValidationError("phi(0) must be 0 for an odd map");
  Vec pos(samples + 1);
  pos[0] = 0.0;
  for (int k = 1; k <= samples; ++k) {
    const double t = top * k / samples;
    const double a = phi(t), b = phi(-t);
    if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("phi is not finite");
    if (std::abs(a + b) > 1e-10 * (1.0 + std::abs(a))) throw ValidationError("phi is not odd");
    if (!(a > prev)) throw ValidationError("phi is not strictly increasing");
    prev = a;
    pos[k] = a;
  }
  for (int k = 1; k < samples; ++k) {
    const double second = pos[k + 1] - 2.0 * pos[k] + pos[k - 1];
    const double tol = 1e-10 * (1.0 + std::abs(pos[k]));
    if (shape == PhiShape::convex && second < -tol)
      throw ValidationError("phi declared convex on t > 0 but is not");
    if (shape == PhiShape::concave && second > tol)
      throw ValidationError("phi declared concave on t > 0 but is not");
  }
}

double energy(const WeightedGraph& g, std::span<const double> f, double p) {
  require_p(p);
  require_size(g, f);
  double s = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x)
    for (std::size_t y : g.neighbors(x))
      s += g.weight(x, y) / g.measure(x) * std::pow(std::abs(f[y] - f[x]), p);
  return 0.5 * s;
}

Vec p_laplacian(const WeightedGraph& g, std::span<const double> f, double p) {
  require_p(p);
  if (p == 1.0) throw ValidationError("Delta_1 is set valued; use p1_membership");
  return phi_laplacian(g, f, PhiSpec::power(p));
}

Vec phi_laplacian(const WeightedGraph& g, std::span<const double> f, const PhiSpec& phi) {
  require_size(g, f);
  Vec out(g.size(), 0.0);
  for (std::size_t x = 0; x < g.size(); ++x) {
    double s = 0.0;
    for (std::size_t y : g.neighbors(x)) s += g.weight(x, y) * phi(f[y] - f[x]);
    out[x] = s / g.measure(x);
  }
  return out;
}

Vec p1_laplacian_value(const WeightedGraph& g, std::span<const double> selection) {
  const auto& edges = g.edges();
  if (selection.size() != edges.size()) throw ValidationError("selection needs one value per edge");
  Vec out(g.size(), 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double w = g.weight(edges[k].u, edges[k].v);
    out[edges[k].u] += w * selection[k];
    out[edges[k].v] -= w * selection[k];
  }
  for (std::size_t x = 0; x < g.size(); ++x) out[x] /= g.measure(x);
  return out;
}

MembershipCheck p1_membership(const WeightedGraph& g, std::span<const double> f,
                              std::span<const double> h, std::span<const double> selection,
                              double tolerance) {
  require_size(g, f);
  require_size(g, h);
  MembershipCheck out;
  const auto& edges = g.edges();
  if (selection.size() != edges.size()) throw ValidationError("selection needs one value per edge");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double grad = f[edges[k].v] - f[edges[k].u];
    const double s = selection[k];
    double viol;
    if (grad > 0.0) viol = std::abs(s - 1.0);
    else if (grad < 0.0) viol = std::abs(s + 1.0);
    else viol = std::max(0.0, std::abs(s) - 1.0);
    out.selection_violation = std::max(out.selection_violation, viol);
  }
  const Vec lap = p1_laplacian_value(g, selection);
  for (std::size_t x = 0; x < g.size(); ++x)
    out.value_violation = std::max(out.value_violation, std::abs(h[x] - lap[x]));
  out.member = out.selection_violation <= tolerance && out.value_violation <= tolerance;
  return out;
}

ResolventSolution resolvent(const WeightedGraph& g, std::span<const double> f, double p,
                            double eps, const ResolventOptions& opts) {
  require_p(p);
  require_resolvent_inputs(g, f, eps);
  if (value_range(f) == 0.0) return constant_solution(g, f);
  if (p == 1.0) return resolvent_p1(g, f, eps, opts);

  const auto edges = edge_data(g);
  const double tol = opts.residual_tolerance * std::max(1.0, sup_norm(f));
  if (p == 2.0) {
    ResolventSolution sol;
    sol.g = resolvent_linear(g, f, eps);
    const Vec r = residual_vector(g, edges, f, eps, PowerPotential{2.0}, sol.g);
    sol.residual = sup_norm(r);
    if (sol.residual > tol) {
      auto out = newton_prox(g, edges, f, eps, PowerPotential{2.0}, sol.g, tol, opts.max_newton_steps);
      return finish(std::move(out), tol, "p = 2");
    }
    return sol;
  }
  Vec x(f.begin(), f.end());
  std::size_t steps = 0;
  if (p < 2.0) {
    // Continuation through smoothed potentials keeps Newton in its region
    // of fast convergence while |t|^{p-2} is singular at 0.
    const double range = value_range(f);
    for (int k = 0; k <= 8; ++k) {
      const SmoothedPowerPotential pot{p, range * std::pow(10.0, -k)};
      auto out = newton_prox(g, edges, f, eps, pot, std::move(x), tol, opts.max_newton_steps);
      x = std::move(out.g);
      steps += out.steps;
    }
  }
  auto out = newton_prox(g, edges, f, eps, PowerPotential{p}, std::move(x), tol,
                         opts.max_newton_steps);
  out.steps += steps;
  return finish(std::move(out), tol, "p = " + format_double(p));
}

ResolventSolution resolvent(const WeightedGraph& g, std::span<const double> f,
                            const PhiSpec& phi, double eps, const ResolventOptions& opts) {
  if (phi.kind == PhiSpec::Kind::p_power) return resolvent(g, f, phi.p, eps, opts);
  require_resolvent_inputs(g, f, eps);
  if (value_range(f) == 0.0) return constant_solution(g, f);
  const auto edges = edge_data(g);
  const double tol = opts.residual_tolerance * std::max(1.0, sup_norm(f));
  auto out = newton_prox(g, edges, f, eps, CustomPotential{&phi}, Vec(f.begin(), f.end()), tol,
                         opts.max_newton_steps);
  return finish(std::move(out), tol, phi.name);
}

Vec resolvent_linear(const WeightedGraph& g, std::span<const double> f, double eps) {
  require_resolvent_inputs(g, f, eps);
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    for (std::size_t y : g.neighbors(x)) {
      const double c = eps * g.weight(x, y) / g.measure(x);
      a(xi, static_cast<Eigen::Index>(y)) -= c;
      a(xi, xi) += c;
    }
  }
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = f[static_cast<std::size_t>(i)];
  const Eigen::VectorXd sol = a.partialPivLu().solve(rhs);
  return Vec(sol.data(), sol.data() + n);
}

double combinatorial_lipschitz(const WeightedGraph& g, std::span<const double> f) {
  require_size(g, f);
  double best = 0.0;
  for (const Edge& e : g.edges()) best = std::max(best, std::abs(f[e.v] - f[e.u]));
  return best;
}

double min_modified_curvature(const WeightedGraph& g, const PhiSpec& phi) {
  const DistanceMatrix d0 = shortest_path_metric(g.with_unit_lengths());
  double best = std::numeric_limits<double>::infinity();
  const bool linear = phi.kind == PhiSpec::Kind::p_power && phi.p == 2.0;
  for (const Edge& e : g.edges()) {
    double k;
    if (linear) {
      // A linear phi is both convex and concave, so either bound applies.
      std::optional<double> v;
      for (PhiShape s : {PhiShape::convex, PhiShape::concave}) {
        try {
          const double c = modified_kappa_phi(g, d0, e.u, e.v, s);
          v = v ? std::max(*v, c) : c;
        } catch (const PreconditionError&) {
        }
      }
      if (!v) throw PreconditionError("modified curvature infeasible on edge " + e.label());
      k = *v;
    } else {
      k = modified_kappa_phi(g, d0, e.u, e.v, phi.shape);
    }
    best = std::min(best, k);
  }
  return best;
}

double admissible_epsilon(double lip, const PhiSpec& phi, double k, double eps0) {
  if (!(eps0 > 0.0)) throw ValidationError("eps must be positive");
  if (lip <= 0.0) return eps0;
  const double factor = phi(lip) / lip * k;
  double eps = eps0;
  for (int i = 0; i < 200; ++i, eps *= 0.5)
    if (1.0 + eps * factor > 0.0) return eps;
  throw PreconditionError("no admissible eps for the Lipschitz decay bound");
}

DecayCheck lipschitz_decay_bound(const WeightedGraph& g, std::span<const double> f,
                                 const PhiSpec& phi, double eps, double k, double slack) {
  require_resolvent_inputs(g, f, eps);
  DecayCheck out;
  out.epsilon = eps;
  out.k = k;
  out.curvature_min = g.edges().empty() ? std::numeric_limits<double>::infinity()
                                        : min_modified_curvature(g, phi);
  if (k > out.curvature_min + 1e-12) {
    throw PreconditionError("K = " + format_double(k) + " exceeds the minimum modified curvature " +
                            format_double(out.curvature_min));
  }
  out.lip_f = combinatorial_lipschitz(g, f);
  const auto sol = resolvent(g, f, phi, eps);
  out.residual = sol.residual;
  out.lhs = combinatorial_lipschitz(g, sol.g);
  if (out.lip_f == 0.0) {
    out.rhs = 0.0;
  } else {
    const double denom = 1.0 + eps * phi(out.lip_f) / out.lip_f * k;
    if (!(denom > 0.0)) {
      throw PreconditionError("1 + eps Lip(f)^{-1} phi(Lip(f)) K must be positive, got " +
                              format_double(denom));
    }
    out.rhs = out.lip_f / denom;
  }
  out.holds = out.lhs <= out.rhs + slack;
  return out;
}

}  // namespace nlmc
