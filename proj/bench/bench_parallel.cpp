// Serial vs OpenMP timings of the parallel kernels on random graphs.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "CLI11.hpp"
#include "nlmc/curvature.hpp"
#include "nlmc/graph.hpp"
#include "nlmc/ricci_flow.hpp"
#include "nlmc/separation.hpp"

using namespace nlmc;

namespace {

// Connected graph with a random spanning tree plus extra edges and deg <= 1.
WeightedGraph random_graph(std::mt19937_64& rng, std::size_t n, double extra) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<EdgeSpec> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t u = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    edges.push_back({u, v, 0.5 + 1.5 * unit(rng), 0.5 + 1.5 * unit(rng)});
    used[u][v] = true;
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (!used[u][v] && unit(rng) < extra) edges.push_back({u, v, 0.5 + 1.5 * unit(rng), 0.5 + 1.5 * unit(rng)});
  Vec m(n, 0.0);
  for (const auto& e : edges) {
    m[e.u] += e.weight;
    m[e.v] += e.weight;
  }
  for (double& x : m) x *= 1.0 + 0.5 * unit(rng);
  return WeightedGraph(n, edges, m);
}

template <class F>
double best_seconds(int repeats, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s %12.4f %12.4f %9.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t vertices = 60;
  double extra = 0.15;
  int repeats = 3;
  std::size_t flow_steps = 20;
  std::size_t samples = 64;
  std::uint64_t seed = 7;
  CLI::App app{"Serial vs parallel kernel timings"};
  app.add_option("--vertices", vertices, "Graph size")->capture_default_str();
  app.add_option("--extra", extra, "Extra edge probability")->capture_default_str();
  app.add_option("--repeats", repeats, "Timing repeats (best is reported)")->capture_default_str();
  app.add_option("--flow-steps", flow_steps, "Flow iterations")->capture_default_str();
  app.add_option("--samples", samples, "Ric_1 random starts")->capture_default_str();
  app.add_option("--seed", seed, "Graph seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::mt19937_64 rng(seed);
  const WeightedGraph g = random_graph(rng, vertices, extra);
  std::printf("graph: %zu vertices, %zu edges, %d OpenMP threads\n", g.size(), g.edges().size(),
              omp_get_max_threads());
  std::printf("%-22s %12s %12s %10s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

  DistanceMatrix ds, dp;
  const double t_sp_s = best_seconds(repeats, [&] { ds = shortest_path_metric(g, Execution::serial); });
  const double t_sp_p = best_seconds(repeats, [&] { dp = shortest_path_metric(g, Execution::parallel); });
  bool same = true;
  for (std::size_t x = 0; x < g.size(); ++x)
    for (std::size_t y = 0; y < g.size(); ++y) same = same && ds(x, y) == dp(x, y);
  row("shortest_path_metric", t_sp_s, t_sp_p, same);

  CurvatureReport cs, cp;
  const double t_c_s = best_seconds(repeats, [&] { cs = curvature_report(g, ds, CurvatureKind::ollivier, 0.5, Execution::serial); });
  const double t_c_p = best_seconds(repeats, [&] { cp = curvature_report(g, ds, CurvatureKind::ollivier, 0.5, Execution::parallel); });
  row("curvature_report", t_c_s, t_c_p, cs.kappa == cp.kappa);

  FlowConfig fc;
  fc.max_iterations = flow_steps;
  FlowResult fs, fp;
  const double t_f_s = best_seconds(repeats, [&] {
    fc.execution = Execution::serial;
    fs = run_flow(g, fc);
  });
  const double t_f_p = best_seconds(repeats, [&] {
    fc.execution = Execution::parallel;
    fp = run_flow(g, fc);
  });
  row("run_flow", t_f_s, t_f_p, fs.state.graph.edge_lengths() == fp.state.graph.edge_lengths());

  const ChainOperator chain = laplacian_chain(g, 0.5 / g.max_degree());
  RicOptions ro;
  ro.samples = samples;
  RicEstimate rs, rp;
  const double t_r_s = best_seconds(repeats, [&] {
    ro.execution = Execution::serial;
    rs = ric_r(chain, ds, 1.0, ro);
  });
  const double t_r_p = best_seconds(repeats, [&] {
    ro.execution = Execution::parallel;
    rp = ric_r(chain, ds, 1.0, ro);
  });
  row("ric_r", t_r_s, t_r_p, rs.sampled == rp.sampled);
  return 0;
}
