#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "instances.hpp"
#include "nlmc/curvature.hpp"
#include "nlmc/error.hpp"
#include "oracles.hpp"

using namespace nlmc;

TEST_CASE("vertex measures") {
  auto two = instances::two_vertex_graph();
  auto mu = vertex_measure(two, 0);
  CHECK(mu.mass_at(1) == 1.0);
  CHECK(mu.mass_at(0) == 0.0);
  auto lazy = vertex_measure(two, 0, 0.0);
  CHECK(lazy.mass_at(0) == 1.0);

  auto k3 = instances::complete_graph(3, 2.0);
  auto m3 = vertex_measure(k3, 0);
  CHECK(m3.mass_at(1) == 0.5);
  CHECK(m3.mass_at(2) == 0.5);

  auto heavy = instances::complete_graph(3, 1.0);  // deg = 2
  CHECK_THROWS_AS(vertex_measure(heavy, 0), ValidationError);
  CHECK_THROWS_AS(vertex_measure(heavy, 0, 0.6), ValidationError);
  CHECK(vertex_measure(heavy, 0, 0.5).mass_at(0) == 0.0);
}

TEST_CASE("ollivier curvature hand instances") {
  auto two = instances::two_vertex_graph();
  auto d2 = shortest_path_metric(two);
  CHECK(ollivier_kappa(two, d2, 0, 1) == doctest::Approx(0.0));

  auto k3 = instances::complete_graph(3, 2.0);
  auto d3 = shortest_path_metric(k3);
  // 2x2 transport between (1/2 at 1, 1/2 at 2) and (1/2 at 0, 1/2 at 2).
  Matrix cost(2, 2);
  cost(0, 0) = d3(1, 0);
  cost(0, 1) = d3(1, 2);
  cost(1, 0) = d3(2, 0);
  cost(1, 1) = d3(2, 2);
  const double w = oracle::transport_by_enumeration({0.5, 0.5}, {0.5, 0.5}, cost);
  CHECK(ollivier_kappa(k3, d3, 0, 1) == doctest::Approx(1.0 - w));
  CHECK(ollivier_kappa(k3, d3, 0, 1) == doctest::Approx(0.5));
}

TEST_CASE("lazy and LLY curvature") {
  auto two = instances::two_vertex_graph();
  auto d = shortest_path_metric(two);
  CHECK(kappa_alpha(two, d, 0, 1, 0.0) == 0.0);
  for (double a : {0.1, 0.25, 0.4, 0.5}) CHECK(kappa_alpha(two, d, 0, 1, a) == doctest::Approx(2 * a));
  CHECK(kappa_lly(two, d, 0, 1) == doctest::Approx(2.0).epsilon(1e-9));

  auto c6 = instances::cycle_graph(6, 2.0);
  auto d6 = shortest_path_metric(c6);
  for (const Edge& e : c6.edges()) CHECK(std::abs(kappa_lly(c6, d6, e.u, e.v)) < 1e-9);

  auto k3 = instances::complete_graph(3, 2.0);
  auto d3 = shortest_path_metric(k3);
  // Small alpha: mu^alpha_x = (1-alpha) at x, alpha/2 at the others; optimal
  // cost is (1 - 3 alpha / 2), so kappa^alpha = 3 alpha / 2.
  CHECK(kappa_lly(k3, d3, 0, 1) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(kappa_alpha(k3, d3, 0, 1, 1.0) == doctest::Approx(ollivier_kappa(k3, d3, 0, 1)));
}

TEST_CASE("lazy curvature is concave in alpha") {
  instances::Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = instances::random_connected_graph(rng);
    auto d = shortest_path_metric(g);
    const Edge e = g.edges().front();
    Vec k;
    for (int i = 0; i <= 20; ++i) k.push_back(kappa_alpha(g, d, e.u, e.v, i / 20.0));
    for (int i = 1; i < 20; ++i) CHECK(k[i] >= 0.5 * (k[i - 1] + k[i + 1]) - 1e-9);
  }
}

TEST_CASE("curvature invariants on random graphs") {
  instances::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = instances::random_connected_graph(rng);
    auto d = shortest_path_metric(g);
    auto ds = shortest_path_metric(g.with_scaled_lengths(1.7));
    auto rep = curvature_report(g, d, CurvatureKind::ollivier);
    auto par = curvature_report(g, d, CurvatureKind::ollivier, 0.5, Execution::parallel);
    REQUIRE(rep.kappa.size() == g.edges().size());
    for (std::size_t k = 0; k < rep.kappa.size(); ++k) {
      const Edge e = rep.edges[k];
      CHECK(rep.kappa[k] <= 1.0);
      CHECK(rep.kappa[k] == par.kappa[k]);
      CHECK(std::abs(ollivier_kappa(g, d, e.v, e.u) - rep.kappa[k]) < 1e-9);
      CHECK(std::abs(ollivier_kappa(g.with_scaled_lengths(1.7), ds, e.u, e.v) - rep.kappa[k]) <
            1e-9);
      CHECK(std::abs(kappa_alpha(g, d, e.u, e.v, 1e-4)) < 1e-3);
    }
    CHECK(rep.max_spread() >= 0.0);
    CHECK(rep.components.size() == 1);
  }
}

TEST_CASE("modified curvature") {
  auto two = instances::two_vertex_graph();
  CHECK(modified_kappa_phi(two, 0, 1, PhiShape::convex) == doctest::Approx(0.0));
  CHECK(modified_kappa_phi(two, 0, 1, PhiShape::concave) == doctest::Approx(0.0));
  CHECK(phi_shape_for_p(3.0) == PhiShape::convex);
  CHECK(phi_shape_for_p(1.5) == PhiShape::concave);

  instances::Rng rng(2);
  for (int trial = 0; trial < 15; ++trial) {
    auto g = instances::random_connected_graph(rng);
    auto d0 = shortest_path_metric(g.with_unit_lengths());
    for (const Edge& e : g.edges()) {
      double convex = 0.0;
      try {
        convex = modified_kappa_phi(g, d0, e.u, e.v, PhiShape::convex);
      } catch (const PreconditionError&) {
        continue;  // forbidden cells can block a marginal
      }
      const double free = constrained_transport_max(g, e.u, e.v, d0, ForbidRule::none).value;
      CHECK(convex <= free + 1e-9);
      CHECK(convex <= 1e-9);
    }
  }
}
