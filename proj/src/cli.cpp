#include "nlmc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlmc/chain.hpp"
#include "nlmc/curvature.hpp"
#include "nlmc/error.hpp"
#include "nlmc/format.hpp"
#include "nlmc/io.hpp"
#include "nlmc/plaplace.hpp"
#include "nlmc/ricci_flow.hpp"
#include "nlmc/separation.hpp"

namespace nlmc {

std::uint64_t default_seed() {
  const char* env = std::getenv("NLMC_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(env, &pos, 0);
    if (pos == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  return kDefaultSeed;
}

namespace {

struct Context {
  Context(std::ostream& o, std::ostream& e) : out(o), err(e) {}

  std::ostream& out;
  std::ostream& err;
  std::uint64_t seed = kDefaultSeed;
  std::string out_path;
  std::string trace_path;
  std::string format = "csv";
  bool parallel = false;

  // Rows written to --trace on success and on failure alike.
  std::vector<TraceRecord> trace;
  std::optional<Json> trace_config;

  Execution execution() const { return parallel ? Execution::parallel : Execution::serial; }
};

void emit_report(Context& ctx, const Json& report) {
  if (ctx.out_path.empty()) ctx.out << dump(report);
  else write_text_file(ctx.out_path, dump(report));
}

void flush_trace(Context& ctx) {
  if (ctx.trace_path.empty()) return;
  emit_trace(ctx.trace, parse_trace_format(ctx.format), ctx.trace_path, ctx.trace_config);
}

Json base_config(const Context& ctx, const std::string& command) {
  Json c;
  c["command"] = command;
  c["seed"] = ctx.seed;
  c["execution"] = ctx.parallel ? "parallel" : "serial";
  c["out"] = ctx.out_path.empty() ? Json() : Json(ctx.out_path);
  return c;
}

void add_trace_config(Json& c, const Context& ctx) {
  c["trace"] = ctx.trace_path.empty() ? Json() : Json(ctx.trace_path);
  c["format"] = ctx.format;
}

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(); }

Json edge_json(const Edge& e) { return e.label(); }

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string(name) + " must be positive, got " + format_double(v));
}

int status_exit(IterationStatus s) { return s == IterationStatus::converged ? 0 : 3; }

Json pattern_json(const SeparationResult& r) {
  Json o;
  o["constant"] = number(r.constant);
  o["spread_on_k"] = number(r.spread_on_k);
  o["x_margin"] = number(r.x_margin);
  o["y_margin"] = number(r.y_margin);
  o["sign_pattern"] = r.sign_pattern;
  return o;
}

// ---- curvature -------------------------------------------------------------

struct CurvatureArgs {
  std::string graph;
  double alpha = 0.5;
};

int cmd_curvature(Context& ctx, const CurvatureArgs& a) {
  Json config = base_config(ctx, "curvature");
  config["graph"] = a.graph;
  config["alpha"] = a.alpha;
  if (!(a.alpha >= 0.0 && a.alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  const WeightedGraph g = parse_graph(a.graph);
  const DistanceMatrix d = shortest_path_metric(g, ctx.execution());

  using Cell = std::function<double(const Edge&)>;
  const std::vector<std::pair<std::string, Cell>> kinds{
      {"ollivier", [&](const Edge& e) { return ollivier_kappa(g, d, e.u, e.v); }},
      {"lazy", [&](const Edge& e) { return kappa_alpha(g, d, e.u, e.v, a.alpha); }},
      {"lly", [&](const Edge& e) { return kappa_lly(g, d, e.u, e.v); }},
      {"modified_convex",
       [&](const Edge& e) { return modified_kappa_phi(g, e.u, e.v, PhiShape::convex); }},
      {"modified_concave",
       [&](const Edge& e) { return modified_kappa_phi(g, e.u, e.v, PhiShape::concave); }},
  };

  Json rows = Json::array();
  std::vector<Vec> columns(kinds.size());
  for (const Edge& e : g.edges()) {
    Json row;
    row["edge"] = edge_json(e);
    row["length"] = number(g.length(e.u, e.v));
    Json errors = Json::object();
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      try {
        const double v = kinds[k].second(e);
        row[kinds[k].first] = number(v);
        columns[k].push_back(v);
      } catch (const Error& ex) {
        row[kinds[k].first] = Json();
        errors[kinds[k].first] = ex.what();
      }
    }
    if (!errors.empty()) row["errors"] = std::move(errors);
    rows.push_back(std::move(row));
  }
  Json summary;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    Json s;
    s["edges"] = columns[k].size();
    if (!columns[k].empty()) {
      const auto [lo, hi] = std::minmax_element(columns[k].begin(), columns[k].end());
      s["min"] = number(*lo);
      s["max"] = number(*hi);
    }
    summary[kinds[k].first] = std::move(s);
  }

  Json report;
  report["config"] = std::move(config);
  report["edges"] = std::move(rows);
  report["summary"] = std::move(summary);
  emit_report(ctx, report);
  return 0;
}

// ---- flow ------------------------------------------------------------------

struct FlowArgs {
  std::string graph;
  double alpha = 0.5;
  std::optional<double> threshold;
  double tolerance = 1e-9;
  std::size_t max_iterations = 100000;
};

int cmd_flow(Context& ctx, const FlowArgs& a) {
  Json config = base_config(ctx, "flow");
  config["graph"] = a.graph;
  add_trace_config(config, ctx);
  const WeightedGraph g = parse_graph(a.graph);

  FlowConfig fc;
  fc.alpha = a.alpha;
  fc.deletion_threshold = a.threshold;
  fc.tolerance = a.tolerance;
  fc.max_iterations = a.max_iterations;
  fc.execution = ctx.execution();
  fc = resolve_flow_config(g, fc);
  config["alpha"] = fc.alpha;
  config["deletion_threshold"] = number(*fc.deletion_threshold);
  config["tolerance"] = fc.tolerance;
  config["max_iterations"] = fc.max_iterations;
  ctx.trace_config = config;

  const FlowResult res =
      run_flow(g, fc, [&](const FlowTraceRow& row) { ctx.trace.push_back(to_record(row)); });

  Json report;
  report["config"] = config;
  report["status"] = to_string(res.status);
  report["iterations"] = res.state.iteration;
  report["last_deletion_iteration"] = res.last_deletion_iteration;
  Json deletions = Json::array();
  for (const auto& dr : res.state.deletions) {
    Json o;
    o["iteration"] = dr.iteration;
    o["edge"] = edge_json(dr.edge);
    o["length"] = number(dr.length);
    o["witness"] = edge_json(dr.witness);
    o["witness_length"] = number(dr.witness_length);
    deletions.push_back(std::move(o));
  }
  report["deletions"] = std::move(deletions);
  Json comps = Json::array();
  for (const auto& c : res.components) {
    Json o;
    Json edges = Json::array();
    for (const Edge& e : c.edges) edges.push_back(edge_json(e));
    o["edges"] = std::move(edges);
    o["normalized_metric"] = vector_json(c.normalized);
    o["growth_rate"] = number(c.growth_rate);
    o["curvature"] = number(c.curvature);
    o["curvature_spread"] = number(c.spread);
    comps.push_back(std::move(o));
  }
  report["components"] = std::move(comps);
  report["final_curvature_spread"] = number(res.final_curvature.max_spread());
  report["scale_exponent"] = res.state.scale_exponent;
  Json lengths = Json::array();
  for (const Edge& e : res.state.graph.edges()) {
    Json o;
    o["edge"] = edge_json(e);
    o["length"] = number(std::ldexp(res.state.graph.length(e.u, e.v), res.state.scale_exponent));
    lengths.push_back(std::move(o));
  }
  report["final_lengths"] = std::move(lengths);
  flush_trace(ctx);
  emit_report(ctx, report);
  return res.status == FlowStatus::converged ? 0 : 3;
}

// ---- resolvent -------------------------------------------------------------

struct ResolventArgs {
  std::string graph;
  std::string f;
  double p = 2.0;
  double eps = 0.1;
};

int cmd_resolvent(Context& ctx, const ResolventArgs& a) {
  Json config = base_config(ctx, "resolvent");
  config["graph"] = a.graph;
  config["p"] = a.p;
  config["eps"] = a.eps;
  const WeightedGraph g = parse_graph(a.graph);
  const Vec f = parse_vector_text(a.f);
  config["f"] = vector_json(f);
  if (f.size() != g.size())
    throw ValidationError("f has " + std::to_string(f.size()) + " values for " +
                          std::to_string(g.size()) + " vertices");
  if (!(a.p >= 1.0) || !std::isfinite(a.p)) throw ValidationError("p must be at least 1");
  require_positive(a.eps, "eps");

  const ResolventSolution sol = resolvent(g, f, a.p, a.eps);
  Json report;
  report["config"] = std::move(config);
  report["g"] = vector_json(sol.g);
  report["residual"] = number(sol.residual);
  report["newton_steps"] = sol.newton_steps;
  report["energy_f"] = number(energy(g, f, a.p));
  report["energy_g"] = number(energy(g, sol.g, a.p));
  if (a.p == 1.0) {
    report["selection"] = vector_json(sol.selection);
    report["laplacian"] = vector_json(p1_laplacian_value(g, sol.selection));
  } else {
    report["laplacian"] = vector_json(p_laplacian(g, sol.g, a.p));
  }
  emit_report(ctx, report);
  return 0;
}

// ---- separation ------------------------------------------------------------

struct SeparationArgs {
  std::string graph;
  std::string partition;
  std::string mode = "linear";
  std::string chain = "laplacian";
  std::string f0;
  std::optional<std::size_t> x0;
  std::optional<double> eps;
  double p = 2.0;
  double eps0 = 0.1;
  std::size_t steps = 6;
  double tolerance = 1e-9;
  std::size_t max_iterations = 100000;
  bool waive_curvature = false;
  std::size_t samples = 64;
};

ChainOperator graph_chain(const WeightedGraph& g, const std::string& kind, double p, double eps) {
  if (kind == "laplacian") {
    if (!(eps * g.max_degree() <= 1.0))
      throw PreconditionError("eps * max deg must not exceed 1 for the Laplacian chain");
    return laplacian_chain(g, eps);
  }
  if (kind == "resolvent") return resolvent_chain(g, p, eps);
  throw ValidationError("unknown chain '" + kind + "' (expected laplacian or resolvent)");
}

double default_chain_eps(const WeightedGraph& g, const std::string& kind) {
  if (kind == "laplacian") return g.max_degree() > 0.0 ? 0.5 / g.max_degree() : 0.5;
  return 0.1;
}

int cmd_separation(Context& ctx, const SeparationArgs& a) {
  Json config = base_config(ctx, "separation");
  config["graph"] = a.graph;
  config["partition"] = a.partition;
  config["mode"] = a.mode;
  add_trace_config(config, ctx);
  if (a.mode != "linear" && a.mode != "p" && a.mode != "generic")
    throw ValidationError("unknown mode '" + a.mode + "' (expected linear, p or generic)");

  const WeightedGraph g = parse_graph(a.graph);
  const PartitionXKY part = parse_partition(a.partition, g);
  const Vec f0 = a.f0.empty() ? Vec(part.k().size(), 0.0) : parse_vector_text(a.f0);
  const std::size_t x0 = a.x0 ? *a.x0 : part.k().front();
  config["f0"] = vector_json(f0);
  config["x0"] = x0;
  config["tolerance"] = a.tolerance;
  config["max_iterations"] = a.max_iterations;
  config["waive_curvature"] = a.waive_curvature;
  require_positive(a.tolerance, "tolerance");

  SeparationOptions so;
  so.tolerance = a.tolerance;
  so.max_iterations = a.max_iterations;
  so.waive_curvature = a.waive_curvature;
  so.execution = ctx.execution();

  Json report;
  int code = 0;
  if (a.mode == "linear") {
    if (a.eps) require_positive(*a.eps, "eps");
    config["eps"] = a.eps ? Json(*a.eps) : Json("auto");
    ctx.trace_config = config;
    const auto r = separation_flow_linear(g, part, a.eps, f0, x0, so);
    ctx.trace = to_records(r.trace);
    report["config"] = config;
    report["status"] = to_string(r.status);
    report["iterations"] = r.iterations;
    report["eps"] = number(r.epsilon);
    report["curvature_min"] = number(r.curvature_min);
    report["curvature_waived"] = r.curvature_waived;
    report["g"] = vector_json(r.g);
    report["sg"] = vector_json(r.sg);
    report["laplacian_sg"] = vector_json(r.laplacian);
    report["pattern"] = pattern_json(r);
    report["max_lip_on_k"] = number(r.max_lip_on_k);
    code = status_exit(r.status);
  } else if (a.mode == "p") {
    if (!(a.p >= 1.0) || !std::isfinite(a.p)) throw ValidationError("p must be at least 1");
    require_positive(a.eps0, "eps0");
    if (a.steps == 0) throw ValidationError("steps must be positive");
    config["p"] = a.p;
    config["eps0"] = a.eps0;
    config["steps"] = a.steps;
    ctx.trace_config = config;
    const auto r = separation_flow_p(g, part, a.p, f0, x0, so,
                                     default_epsilon_schedule(a.eps0, a.steps));
    ctx.trace = to_records(r.trace);
    report["config"] = config;
    report["status"] = to_string(r.status);
    report["curvature_min"] = number(r.curvature_min);
    report["curvature_waived"] = r.curvature_waived;
    Json steps = Json::array();
    for (const auto& st : r.steps) {
      Json o;
      o["eps"] = number(st.epsilon);
      o["status"] = to_string(st.status);
      o["iterations"] = st.iterations;
      o["gap"] = number(st.gap);
      o["f_tilde"] = vector_json(st.f_tilde);
      steps.push_back(std::move(o));
    }
    report["steps"] = std::move(steps);
    report["h"] = vector_json(r.h);
    report["g_sub"] = vector_json(r.g_sub);
    if (a.p == 1.0) report["selection"] = vector_json(r.selection);
    report["subgradient_member"] = r.subgradient_member;
    Json pat;
    pat["constant"] = number(r.constant);
    pat["spread_on_k"] = number(r.spread_on_k);
    pat["x_margin"] = number(r.x_margin);
    pat["y_margin"] = number(r.y_margin);
    pat["sign_pattern"] = r.sign_pattern;
    report["pattern"] = std::move(pat);
    Json decay;
    decay["fitted_c"] = number(r.fitted_c);
    decay["c_bound"] = number(r.c_bound);
    decay["linear"] = r.linear_decay;
    decay["slope"] = optional_number(r.decay_slope);
    report["decay"] = std::move(decay);
    report["max_lip_on_k"] = number(r.max_lip_on_k);
    code = status_exit(r.status);
  } else {
    const double eps = a.eps ? *a.eps : default_chain_eps(g, a.chain);
    require_positive(eps, "eps");
    config["chain"] = a.chain;
    config["eps"] = eps;
    if (a.chain == "resolvent") config["p"] = a.p;
    config["samples"] = a.samples;
    ctx.trace_config = config;
    GenericSeparationOptions go;
    static_cast<SeparationOptions&>(go) = so;
    go.ric.samples = a.samples;
    go.ric.seed = ctx.seed;
    go.ric.execution = ctx.execution();
    const DistanceMatrix d = shortest_path_metric(g, ctx.execution());
    const auto r = separation_flow_generic(graph_chain(g, a.chain, a.p, eps), part, d, f0, x0, go);
    ctx.trace = to_records(r.trace);
    report["config"] = config;
    report["status"] = to_string(r.status);
    report["iterations"] = r.iterations;
    report["ric"] = {{"sampled", number(r.ric.sampled)},
                     {"exact", optional_number(r.ric.exact)},
                     {"lower", number(r.ric.lower)},
                     {"rigorous", r.ric.rigorous}};
    report["curvature_waived"] = r.curvature_waived;
    report["g"] = vector_json(r.g);
    report["sg"] = vector_json(r.sg);
    report["laplacian_sg"] = vector_json(r.laplacian);
    report["pattern"] = pattern_json(r);
    report["max_lip_on_k"] = number(r.max_lip_on_k);
    code = status_exit(r.status);
  }
  flush_trace(ctx);
  emit_report(ctx, report);
  return code;
}

// ---- ric -------------------------------------------------------------------

struct RicArgs {
  std::string graph;
  std::string chain = "laplacian";
  std::optional<double> eps;
  double p = 2.0;
  double r = 1.0;
  std::size_t samples = 64;
  std::size_t ascent_steps = 200;
};

int cmd_ric(Context& ctx, const RicArgs& a) {
  Json config = base_config(ctx, "ric");
  config["graph"] = a.graph;
  config["chain"] = a.chain;
  const WeightedGraph g = parse_graph(a.graph);
  const double eps = a.eps ? *a.eps : default_chain_eps(g, a.chain);
  require_positive(eps, "eps");
  require_positive(a.r, "r");
  config["eps"] = eps;
  if (a.chain == "resolvent") config["p"] = a.p;
  config["r"] = a.r;
  config["samples"] = a.samples;
  config["ascent_steps"] = a.ascent_steps;

  RicOptions ro;
  ro.samples = a.samples;
  ro.seed = ctx.seed;
  ro.ascent_steps = a.ascent_steps;
  ro.execution = ctx.execution();
  const DistanceMatrix d = shortest_path_metric(g, ctx.execution());
  const RicEstimate est = ric_r(graph_chain(g, a.chain, a.p, eps), d, a.r, ro);

  Json report;
  report["config"] = std::move(config);
  report["sampled"] = number(est.sampled);
  report["exact"] = optional_number(est.exact);
  report["lower"] = number(est.lower);
  report["upper"] = number(est.upper);
  report["rigorous"] = est.rigorous;
  report["witness"] = vector_json(est.witness);
  emit_report(ctx, report);
  return 0;
}

// ---- pf --------------------------------------------------------------------

struct PfArgs {
  std::string family;
  std::size_t x0 = 0;
  double tolerance = 1e-12;
  std::size_t max_iterations = 100000;
};

int cmd_pf(Context& ctx, const PfArgs& a) {
  Json config = base_config(ctx, "pf");
  config["family"] = a.family;
  config["x0"] = a.x0;
  config["tolerance"] = a.tolerance;
  config["max_iterations"] = a.max_iterations;
  add_trace_config(config, ctx);
  ctx.trace_config = config;
  require_positive(a.tolerance, "tolerance");
  const auto family = parse_family(a.family);
  const std::size_t n = family.front().rows();
  if (a.x0 >= n) throw ValidationError("x0 is not a vertex");

  IterationOptions io;
  io.tolerance = a.tolerance;
  io.max_iterations = a.max_iterations;
  const auto res = iterate_normalized(perron_frobenius_operator(family), Vec(n, 0.0), a.x0, io);
  ctx.trace = to_records(res.trace);

  Json report;
  report["config"] = config;
  report["status"] = to_string(res.status);
  report["iterations"] = res.iterations;
  if (res.limit && res.growth) {
    const Vec& g = *res.limit;
    const double lambda = *res.growth;
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(g[i]);
    const Vec lv = min_family_apply(family, v);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      residual = std::max(residual, std::abs(std::log(lv[i]) - g[i] - 2.0 * lambda));
    report["g"] = vector_json(g);
    report["eigenvector"] = vector_json(v);
    report["lambda"] = number(lambda);
    report["eigenvalue"] = number(std::exp(2.0 * lambda));
    report["log_residual"] = number(residual);
  }
  flush_trace(ctx);
  emit_report(ctx, report);
  return status_exit(res.status);
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::vector<std::string> operators;
  std::string graph;
  std::string family;
  std::size_t dim = 3;
  double shift = 1.0;
  std::optional<double> eps;
  double p = 2.0;
  double alpha = 0.5;
  double eps0 = 0.01;
  std::size_t samples = 200;
  double magnitude = 1.0;
  std::optional<std::size_t> n0_cap;
};

ChainOperator named_operator(const std::string& name, const VerifyArgs& a, Context& ctx,
                             Json& config) {
  auto graph = [&] {
    if (a.graph.empty()) throw ValidationError("operator '" + name + "' needs --graph");
    config["graph"] = a.graph;
    return parse_graph(a.graph);
  };
  if (name == "identity") {
    config["dim"] = a.dim;
    return identity_operator(a.dim);
  }
  if (name == "shift") {
    config["dim"] = a.dim;
    config["shift"] = a.shift;
    return shift_operator(a.dim, a.shift);
  }
  if (name == "laplacian" || name == "resolvent") {
    const WeightedGraph g = graph();
    const double eps = a.eps ? *a.eps : default_chain_eps(g, name);
    require_positive(eps, "eps");
    config["eps"] = eps;
    if (name == "resolvent") config["p"] = a.p;
    return graph_chain(g, name, a.p, eps);
  }
  if (name == "log-flow") {
    config["alpha"] = a.alpha;
    return log_flow_operator(graph(), a.alpha, ctx.execution());
  }
  if (name == "counterexample") {
    config["eps0"] = a.eps0;
    return counterexample_operator(a.eps0);
  }
  if (name == "pf") {
    if (a.family.empty()) throw ValidationError("operator 'pf' needs --family");
    config["family"] = a.family;
    return perron_frobenius_operator(parse_family(a.family));
  }
  throw ValidationError("unknown operator '" + name +
                        "' (expected identity, shift, laplacian, resolvent, log-flow, "
                        "counterexample or pf)");
}

int cmd_verify(Context& ctx, const VerifyArgs& a) {
  Json config = base_config(ctx, "verify");
  config["operators"] = a.operators;
  config["samples"] = a.samples;
  config["magnitude"] = a.magnitude;
  config["n0_cap"] = a.n0_cap ? Json(*a.n0_cap) : Json();
  if (a.operators.empty()) throw ValidationError("verify needs at least one --operator");
  require_positive(a.magnitude, "magnitude");

  // Several operators compose, the first one applied last.
  std::optional<ChainOperator> op;
  for (const auto& name : a.operators) {
    ChainOperator next = named_operator(name, a, ctx, config);
    op = op ? compose(*op, next) : next;
  }
  const PropertyReport rep = verify_properties(*op, a.samples, a.magnitude, ctx.seed, a.n0_cap);

  Json conds = Json::array();
  for (const auto& c : rep.conditions) {
    Json o;
    o["condition"] = c.condition;
    o["name"] = c.name;
    o["declared"] = c.declared;
    o["trials"] = c.trials;
    o["failures"] = c.failures;
    o["passed"] = c.passed;
    o["estimate"] = optional_number(c.estimate);
    o["n0"] = c.n0 ? Json(*c.n0) : Json();
    o["witness"] = c.witness;
    o["witness_ratio"] = number(c.witness_ratio);
    conds.push_back(std::move(o));
  }
  Json report;
  report["config"] = std::move(config);
  report["operator"] = op->name;
  report["dimension"] = op->dimension;
  report["conditions"] = std::move(conds);
  emit_report(ctx, report);
  return 0;
}

// ---- counterexample --------------------------------------------------------

struct CounterexampleArgs {
  double eps0 = 0.01;
  std::size_t iterations = 100;
};

int cmd_counterexample(Context& ctx, const CounterexampleArgs& a) {
  Json config = base_config(ctx, "counterexample");
  config["eps0"] = a.eps0;
  config["iterations"] = a.iterations;
  add_trace_config(config, ctx);
  ctx.trace_config = config;
  if (!(a.eps0 > 0.0 && a.eps0 < 0.5)) throw ValidationError("eps0 must lie in (0, 1/2)");

  const ChainOperator p = counterexample_operator(a.eps0);
  const Vec f0 = counterexample_start(a.eps0);

  // Raw orbit for the fixed iteration budget.
  IterationOptions raw;
  raw.tolerance = std::numeric_limits<double>::min();
  raw.max_iterations = a.iterations;
  raw.renormalize = false;
  raw.detect_oscillation = false;
  const auto orbit = iterate_normalized(p, f0, 0, raw);
  ctx.trace = to_records(orbit.trace);

  Json diffs = Json::array();
  bool alternating = true;
  Vec f = f0;
  for (std::size_t n = 0; n <= a.iterations; ++n) {
    if (n > 0) {
      f = p(f);
      const double expected = (n % 2 ? 2.0 : -2.0) * a.eps0;
      alternating = alternating && f[2] - f[3] == expected;
    }
    diffs.push_back({{"n", n}, {"f_x3_minus_f_x4", number(f[2] - f[3])}});
  }

  IterationOptions detect;
  detect.renormalize = false;
  detect.max_iterations = a.iterations;
  const auto engine = iterate_normalized(p, f0, 0, detect);

  Json report;
  report["config"] = config;
  report["orbit"] = std::move(diffs);
  report["alternating"] = alternating;
  report["engine_status"] = to_string(engine.status);
  report["engine_iterations"] = engine.iterations;
  flush_trace(ctx);
  emit_report(ctx, report);
  return 0;
}

void add_output(CLI::App* sub, Context& ctx, bool trace) {
  sub->add_option("--out,-o", ctx.out_path, "Write the JSON report here instead of stdout");
  sub->add_option("--seed", ctx.seed, "Random seed (default: NLMC_SEED or 0x5eed)");
  if (trace) {
    sub->add_option("--trace", ctx.trace_path, "Write the iteration trace to this file");
    sub->add_option("--format", ctx.format, "Trace format")->check(CLI::IsMember({"csv", "json"}));
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx(out, err);
  ctx.seed = default_seed();

  CLI::App app{"Nonlinear Markov chains, Ricci flow and separation flows on weighted graphs"};
  app.require_subcommand(1);
  app.add_flag("--parallel", ctx.parallel, "Use the OpenMP kernels");

  CurvatureArgs ca;
  auto* curv = app.add_subcommand("curvature", "Per-edge curvature table");
  curv->add_option("graph", ca.graph, "Graph JSON file")->required();
  curv->add_option("--alpha", ca.alpha, "Idleness for the lazy curvature")->capture_default_str();
  add_output(curv, ctx, false);

  FlowArgs fa;
  auto* flow = app.add_subcommand("flow", "Ricci flow with edge deletion");
  flow->add_option("graph", fa.graph, "Graph JSON file")->required();
  flow->add_option("--alpha", fa.alpha, "Flow step size")->capture_default_str();
  flow->add_option("--C", fa.threshold, "Edge deletion threshold (default: twice the initial ratio)");
  flow->add_option("--tol", fa.tolerance, "Convergence tolerance")->capture_default_str();
  flow->add_option("--max-iter", fa.max_iterations, "Iteration cap")->capture_default_str();
  add_output(flow, ctx, true);

  ResolventArgs ra;
  auto* res = app.add_subcommand("resolvent", "Single resolvent solve J_eps f");
  res->add_option("graph", ra.graph, "Graph JSON file")->required();
  res->add_option("--f", ra.f, "Values of f, comma separated or a JSON array")->required();
  res->add_option("--p", ra.p, "Exponent p >= 1")->capture_default_str();
  res->add_option("--eps", ra.eps, "Resolvent parameter")->capture_default_str();
  add_output(res, ctx, false);

  SeparationArgs sa;
  auto* sep = app.add_subcommand("separation", "Separation flows (linear, p, generic)");
  sep->add_option("graph", sa.graph, "Graph JSON file")->required();
  sep->add_option("--partition", sa.partition, "Partition JSON file")->required();
  sep->add_option("--mode", sa.mode, "linear, p or generic")->capture_default_str();
  sep->add_option("--chain", sa.chain, "Generic chain: laplacian or resolvent")->capture_default_str();
  sep->add_option("--f0", sa.f0, "Start on K (default zero)");
  sep->add_option("--x0", sa.x0, "Base vertex in K (default: smallest K vertex)");
  sep->add_option("--eps", sa.eps, "Step parameter (default depends on the mode)");
  sep->add_option("--p", sa.p, "Exponent for the p and resolvent chains")->capture_default_str();
  sep->add_option("--eps0", sa.eps0, "First eps of the p schedule")->capture_default_str();
  sep->add_option("--steps", sa.steps, "Length of the p schedule")->capture_default_str();
  sep->add_option("--tol", sa.tolerance, "Convergence tolerance")->capture_default_str();
  sep->add_option("--max-iter", sa.max_iterations, "Iteration cap")->capture_default_str();
  sep->add_flag("--waive-curvature", sa.waive_curvature, "Run without the curvature precondition");
  sep->add_option("--samples", sa.samples, "Ric_1 samples for the generic mode")->capture_default_str();
  add_output(sep, ctx, true);

  RicArgs ria;
  auto* ric = app.add_subcommand("ric", "Ric_r bounds of a chain on a graph");
  ric->add_option("graph", ria.graph, "Graph JSON file")->required();
  ric->add_option("--chain", ria.chain, "laplacian or resolvent")->capture_default_str();
  ric->add_option("--eps", ria.eps, "Chain parameter");
  ric->add_option("--p", ria.p, "Exponent for the resolvent chain")->capture_default_str();
  ric->add_option("--r", ria.r, "Lipschitz radius")->capture_default_str();
  ric->add_option("--samples", ria.samples, "Random starts")->capture_default_str();
  ric->add_option("--ascent-steps", ria.ascent_steps, "Coordinate ascent sweeps")->capture_default_str();
  add_output(ric, ctx, false);

  PfArgs pa;
  auto* pf = app.add_subcommand("pf", "Perron-Frobenius eigenvector of a min-family");
  pf->add_option("family", pa.family, "Matrix family JSON file")->required();
  pf->add_option("--x0", pa.x0, "Base vertex")->capture_default_str();
  pf->add_option("--tol", pa.tolerance, "Convergence tolerance")->capture_default_str();
  pf->add_option("--max-iter", pa.max_iterations, "Iteration cap")->capture_default_str();
  add_output(pf, ctx, true);

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Randomized check of the chain conditions");
  ver->add_option("--operator", va.operators, "Operator name; repeat to compose")->required();
  ver->add_option("--graph", va.graph, "Graph JSON file");
  ver->add_option("--family", va.family, "Matrix family JSON file");
  ver->add_option("--dim", va.dim, "Dimension for identity and shift")->capture_default_str();
  ver->add_option("--shift", va.shift, "Shift amount")->capture_default_str();
  ver->add_option("--eps", va.eps, "Chain parameter");
  ver->add_option("--p", va.p, "Exponent for the resolvent")->capture_default_str();
  ver->add_option("--alpha", va.alpha, "Flow step size for log-flow")->capture_default_str();
  ver->add_option("--eps0", va.eps0, "Counterexample parameter")->capture_default_str();
  ver->add_option("--samples", va.samples, "Random trials per condition")->capture_default_str();
  ver->add_option("--magnitude", va.magnitude, "Scale of random vectors")->capture_default_str();
  ver->add_option("--n0-cap", va.n0_cap, "Largest n_0 searched");
  add_output(ver, ctx, false);

  CounterexampleArgs cea;
  auto* ce = app.add_subcommand("counterexample", "Oscillating chain without a limit");
  ce->add_option("--eps0", cea.eps0, "Family parameter")->capture_default_str();
  ce->add_option("--iterations", cea.iterations, "Orbit length")->capture_default_str();
  add_output(ce, ctx, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code(ErrorKind::validation);
  }

  try {
    if (*curv) return cmd_curvature(ctx, ca);
    if (*flow) return cmd_flow(ctx, fa);
    if (*res) return cmd_resolvent(ctx, ra);
    if (*sep) return cmd_separation(ctx, sa);
    if (*ric) return cmd_ric(ctx, ria);
    if (*pf) return cmd_pf(ctx, pa);
    if (*ver) return cmd_verify(ctx, va);
    if (*ce) return cmd_counterexample(ctx, cea);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    try {
      flush_trace(ctx);
    } catch (const Error& inner) {
      err << "error: " << inner.what() << "\n";
    }
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    try {
      flush_trace(ctx);
    } catch (const Error&) {
    }
    return exit_code(ErrorKind::solver);
  }
  return exit_code(ErrorKind::validation);
}

}  // namespace nlmc
