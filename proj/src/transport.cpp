#include "nlmc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <limits>
#include <mutex>
#include <queue>
#include <set>
#include <string>
#include <utility>

#include "nlmc/error.hpp"
#include "nlmc/lp.hpp"

namespace nlmc {

ProbMeasure::ProbMeasure(std::vector<std::size_t> support, Vec mass)
    : support_(std::move(support)), mass_(std::move(mass)) {
  if (support_.size() != mass_.size()) throw ValidationError("support/mass size mismatch");
  if (support_.empty()) throw ValidationError("empty probability measure");
  std::set<std::size_t> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!seen.insert(support_[i]).second) {
      throw ValidationError("repeated support point " + std::to_string(support_[i]));
    }
    if (!(mass_[i] >= 0.0) || !std::isfinite(mass_[i])) {
      throw ValidationError("negative mass at vertex " + std::to_string(support_[i]));
    }
    total += mass_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("measure has total mass " + std::to_string(total));
  }
}

double ProbMeasure::mass_at(std::size_t vertex) const {
  for (std::size_t i = 0; i < support_.size(); ++i)
    if (support_[i] == vertex) return mass_[i];
  return 0.0;
}

double TransportPlan::row_sum(std::size_t i) const {
  double s = 0.0;
  for (double v : mass.row(i)) s += v;
  return s;
}

double TransportPlan::col_sum(std::size_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < sources.size(); ++i) s += mass(i, j);
  return s;
}

double TransportPlan::cost(const DistanceMatrix& d) const {
  double s = 0.0;
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (std::size_t j = 0; j < targets.size(); ++j)
      if (mass(i, j) != 0.0) s += mass(i, j) * d(sources[i], targets[j]);
  return s;
}

double TransportPlan::marginal_error(const ProbMeasure& source, const ProbMeasure& target) const {
  double err = 0.0;
  for (std::size_t i = 0; i < sources.size(); ++i)
    err = std::max(err, std::abs(row_sum(i) - source.mass_at(sources[i])));
  for (std::size_t j = 0; j < targets.size(); ++j)
    err = std::max(err, std::abs(col_sum(j) - target.mass_at(targets[j])));
  // Mass of the marginals that the plan does not cover at all.
  for (std::size_t k = 0; k < source.size(); ++k)
    if (std::find(sources.begin(), sources.end(), source.support()[k]) == sources.end())
      err = std::max(err, source.mass()[k]);
  for (std::size_t k = 0; k < target.size(); ++k)
    if (std::find(targets.begin(), targets.end(), target.support()[k]) == targets.end())
      err = std::max(err, target.mass()[k]);
  for (double v : mass.data()) err = std::max(err, -v);
  return err;
}

namespace {

std::atomic<bool> g_audit_on{false};
std::mutex g_audit_mutex;
TransportAudit g_audit;

struct Cell {
  std::size_t i;
  std::size_t j;
};

// Transportation simplex on an a x b cost matrix. Basic cells form a spanning
// tree of the bipartite row/column graph, kept at exactly a + b - 1 cells
// (degenerate cells carry zero mass).
class TransportationSimplex {
 public:
  TransportationSimplex(const Vec& supply, const Vec& demand, const Matrix& cost)
      : a_(supply.size()), b_(demand.size()), cost_(cost), flow_(a_, b_), basic_(a_ * b_, false) {
    // Relative tolerance: flow metrics shrink geometrically, so costs can be
    // far below 1.
    double scale = 0.0;
    for (double c : cost.data()) scale = std::max(scale, std::abs(c));
    tol_ = 1e-12 * scale;
    northwest_corner(supply, demand);
  }

  std::size_t solve() {
    std::size_t pivots = 0;
    const std::size_t limit = 50 * (a_ + b_) * (a_ * b_) + 1000;
    while (true) {
      compute_potentials();
      std::size_t enter = a_ * b_;
      for (std::size_t k = 0; k < a_ * b_; ++k) {
        if (basic_[k]) continue;
        const std::size_t i = k / b_, j = k % b_;
        if (cost_(i, j) - u_[i] - v_[j] < -tol_) {
          enter = k;
          break;
        }
      }
      if (enter == a_ * b_) return pivots;
      pivot(enter);
      if (++pivots > limit) throw SolverError("transportation simplex pivot limit exceeded");
    }
  }

  const Matrix& flow() const { return flow_; }

 private:
  void northwest_corner(Vec supply, Vec demand) {
    std::size_t i = 0, j = 0;
    while (true) {
      const double q = std::min(supply[i], demand[j]);
      flow_(i, j) = q;
      basic_[i * b_ + j] = true;
      supply[i] -= q;
      demand[j] -= q;
      if (i == a_ - 1 && j == b_ - 1) break;
      if (j == b_ - 1) ++i;
      else if (i == a_ - 1) ++j;
      else if (supply[i] <= demand[j]) ++i;
      else ++j;
    }
  }

  // Tree adjacency: node r < a_ is row r, node a_ + c is column c.
  std::vector<std::vector<std::size_t>> tree() const {
    std::vector<std::vector<std::size_t>> adj(a_ + b_);
    for (std::size_t k = 0; k < a_ * b_; ++k) {
      if (!basic_[k]) continue;
      adj[k / b_].push_back(a_ + k % b_);
      adj[a_ + k % b_].push_back(k / b_);
    }
    return adj;
  }

  void compute_potentials() {
    u_.assign(a_, 0.0);
    v_.assign(b_, 0.0);
    const auto adj = tree();
    std::vector<bool> seen(a_ + b_, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      const std::size_t node = q.front();
      q.pop();
      for (std::size_t nb : adj[node]) {
        if (seen[nb]) continue;
        seen[nb] = true;
        if (node < a_) v_[nb - a_] = cost_(node, nb - a_) - u_[node];
        else u_[nb] = cost_(nb, node - a_) - v_[node - a_];
        q.push(nb);
      }
    }
  }

  void pivot(std::size_t enter) {
    const std::size_t i0 = enter / b_, j0 = enter % b_;
    const auto adj = tree();
    // Path in the tree from row i0 to column j0.
    std::vector<std::size_t> parent(a_ + b_, a_ + b_);
    std::vector<bool> seen(a_ + b_, false);
    std::queue<std::size_t> q;
    q.push(i0);
    seen[i0] = true;
    while (!q.empty()) {
      const std::size_t node = q.front();
      q.pop();
      for (std::size_t nb : adj[node]) {
        if (seen[nb]) continue;
        seen[nb] = true;
        parent[nb] = node;
        q.push(nb);
      }
    }
    std::vector<Cell> path;  // ordered from column j0 back to row i0
    for (std::size_t node = a_ + j0; node != i0; node = parent[node]) {
      const std::size_t p = parent[node];
      path.push_back(node < a_ ? Cell{node, p - a_} : Cell{p, node - a_});
    }
    // Cells at even positions (starting next to column j0) lose mass.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = a_ * b_;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const std::size_t idx = path[k].i * b_ + path[k].j;
      const double x = flow_(path[k].i, path[k].j);
      if (x < theta || (x == theta && idx < leave)) {
        theta = x;
        leave = idx;
      }
    }
    flow_(i0, j0) += theta;
    for (std::size_t k = 0; k < path.size(); ++k) {
      double& x = flow_(path[k].i, path[k].j);
      x += (k % 2 == 0) ? -theta : theta;
    }
    flow_(leave / b_, leave % b_) = 0.0;
    basic_[leave] = false;
    basic_[enter] = true;
  }

  std::size_t a_, b_;
  const Matrix& cost_;
  Matrix flow_;
  std::vector<bool> basic_;
  Vec u_, v_;
  double tol_ = 0.0;
};

void require_same_component(const ProbMeasure& mu1, const ProbMeasure& mu2,
                            const DistanceMatrix& d) {
  const std::size_t ref = mu1.support().front();
  for (const auto* mu : {&mu1, &mu2}) {
    for (std::size_t x : mu->support()) {
      if (x >= d.size()) throw ValidationError("support point outside the metric");
      if (!d.finite(ref, x)) throw ValidationError("supports lie in different components");
    }
  }
}

}  // namespace

WassersteinResult wasserstein(const ProbMeasure& mu1, const ProbMeasure& mu2,
                              const DistanceMatrix& d) {
  require_same_component(mu1, mu2, d);
  WassersteinResult out;
  out.plan.sources = mu1.support();
  out.plan.targets = mu2.support();
  const std::size_t a = mu1.size(), b = mu2.size();
  Matrix cost(a, b);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) cost(i, j) = d(mu1.support()[i], mu2.support()[j]);
  TransportationSimplex simplex(mu1.mass(), mu2.mass(), cost);
  out.pivots = simplex.solve();
  out.plan.mass = simplex.flow();
  for (double& x : out.plan.mass.data()) x = std::max(0.0, x);
  out.cost = out.plan.cost(d);
  if (g_audit_on.load(std::memory_order_relaxed)) {
    const auto cert = dual_certificate(mu1, mu2, d, out.plan);
    std::lock_guard lock(g_audit_mutex);
    ++g_audit.calls;
    if (cert.certified) ++g_audit.certified;
    g_audit.max_gap = std::max(g_audit.max_gap, cert.gap);
  }
  return out;
}

void enable_transport_audit(bool on) { g_audit_on.store(on); }
bool transport_audit_enabled() { return g_audit_on.load(); }

TransportAudit transport_audit() {
  std::lock_guard lock(g_audit_mutex);
  return g_audit;
}

void reset_transport_audit() {
  std::lock_guard lock(g_audit_mutex);
  g_audit = {};
}

DualCertificate dual_certificate(const ProbMeasure& mu1, const ProbMeasure& mu2,
                                 const DistanceMatrix& d, const TransportPlan& plan) {
  require_same_component(mu1, mu2, d);
  std::vector<std::size_t> pts = mu1.support();
  for (std::size_t x : mu2.support())
    if (std::find(pts.begin(), pts.end(), x) == pts.end()) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  const std::size_t k = pts.size();

  double diameter = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) diameter = std::max(diameter, d(pts[i], pts[j]));

  // The LP runs on d / diameter so its absolute tolerances stay meaningful
  // at any scale. Variables psi = phi + 1 >= 0 with phi(pts[0]) = 0.
  const double unit = diameter > 0.0 ? diameter : 1.0;
  lp::LinearProgram prog;
  prog.num_vars = k;
  prog.objective.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    prog.objective[i] = mu1.mass_at(pts[i]) - mu2.mass_at(pts[i]);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      Vec row(k, 0.0);
      row[i] = 1.0;
      row[j] = -1.0;
      prog.add(std::move(row), lp::Relation::less_equal, d(pts[i], pts[j]) / unit);
    }
  }
  Vec anchor(k, 0.0);
  anchor[0] = 1.0;
  prog.add(std::move(anchor), lp::Relation::equal, 1.0);

  DualCertificate cert;
  cert.potential.assign(d.size(), 0.0);
  cert.primal_value = plan.cost(d);
  const auto res = lp::solve(prog);
  if (res.status != lp::Status::optimal) {
    cert.gap = std::numeric_limits<double>::infinity();
    return cert;
  }
  Vec phi(k);
  for (std::size_t i = 0; i < k; ++i) phi[i] = (res.x[i] - 1.0) * unit;
  for (std::size_t i = 0; i < k; ++i) cert.dual_value += phi[i] * prog.objective[i];
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      cert.lipschitz = std::max(cert.lipschitz, std::abs(phi[i] - phi[j]) / d(pts[i], pts[j]));

  // McShane extension to the rest of the component keeps the constant.
  for (std::size_t z = 0; z < d.size(); ++z) {
    if (!d.finite(pts[0], z)) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) best = std::min(best, phi[i] + d(pts[i], z));
    cert.potential[z] = best;
  }
  for (std::size_t i = 0; i < k; ++i) cert.potential[pts[i]] = phi[i];

  cert.gap = std::abs(cert.primal_value - cert.dual_value);
  cert.certified = cert.gap <= 1e-7 && cert.lipschitz <= 1.0 + 1e-9 &&
                   plan.marginal_error(mu1, mu2) <= 1e-9;
  return cert;
}

ConstrainedTransport constrained_transport_max(const WeightedGraph& g, std::size_t x,
                                               std::size_t y, const DistanceMatrix& d0,
                                               ForbidRule forbid) {
  if (x >= g.size() || y >= g.size() || !g.adjacent(x, y)) {
    throw ValidationError("constrained transport needs an edge");
  }
  auto ball = [&](std::size_t c) {
    std::vector<std::size_t> b = g.neighbors(c);
    b.push_back(c);
    std::sort(b.begin(), b.end());
    return b;
  };
  ConstrainedTransport out;
  out.plan.sources = ball(x);
  out.plan.targets = ball(y);
  const auto& src = out.plan.sources;
  const auto& dst = out.plan.targets;
  const double dxy = d0(x, y);

  auto forbidden = [&](std::size_t xp, std::size_t yp) {
    switch (forbid) {
      case ForbidRule::three_cycles:
        return xp == yp;
      case ForbidRule::five_cycles:
        return xp != x && yp != y && d0(xp, yp) == 2.0;
      case ForbidRule::none:
        break;
    }
    return false;
  };

  std::vector<Cell> cells;
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = 0; j < dst.size(); ++j)
      if (!forbidden(src[i], dst[j])) cells.push_back({i, j});

  lp::LinearProgram prog;
  prog.num_vars = cells.size();
  for (const Cell& c : cells) prog.objective.push_back(1.0 - d0(src[c.i], dst[c.j]) / dxy);
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == x) continue;
    Vec row(cells.size(), 0.0);
    for (std::size_t k = 0; k < cells.size(); ++k) row[k] = cells[k].i == i ? 1.0 : 0.0;
    prog.add(std::move(row), lp::Relation::equal, g.weight(x, src[i]) / g.measure(x));
  }
  for (std::size_t j = 0; j < dst.size(); ++j) {
    if (dst[j] == y) continue;
    Vec row(cells.size(), 0.0);
    for (std::size_t k = 0; k < cells.size(); ++k) row[k] = cells[k].j == j ? 1.0 : 0.0;
    prog.add(std::move(row), lp::Relation::equal, g.weight(y, dst[j]) / g.measure(y));
  }
  prog.add(Vec(cells.size(), 1.0), lp::Relation::equal, 1.0);

  const auto res = lp::solve(prog);
  if (res.status != lp::Status::optimal) {
    throw PreconditionError("modified curvature transport infeasible on edge " +
                            make_edge(x, y).label());
  }
  out.value = res.value;
  out.plan.mass = Matrix(src.size(), dst.size());
  for (std::size_t k = 0; k < cells.size(); ++k) out.plan.mass(cells[k].i, cells[k].j) = res.x[k];
  return out;
}

}  // namespace nlmc
