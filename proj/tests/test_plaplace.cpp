#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "instances.hpp"
#include "nlmc/error.hpp"
#include "nlmc/plaplace.hpp"
#include "oracles.hpp"

using namespace nlmc;

namespace {

WeightedGraph unit_pair() {
  std::vector<EdgeSpec> e{{0, 1, 1.0, 1.0}};
  return WeightedGraph(2, e, Vec{1.0, 1.0});
}

// Random graph with constant measure, the setting of the variational form.
WeightedGraph constant_measure_graph(instances::Rng& rng, std::size_t max_vertices = 8) {
  instances::GraphParams params;
  params.max_vertices = max_vertices;
  params.unit_lengths = true;
  const std::size_t n = instances::uniform_index(rng, params.min_vertices, params.max_vertices);
  auto edges = instances::random_connected_edges(rng, n, params);
  const double m = instances::uniform(rng, 0.5, 3.0);
  return WeightedGraph(n, edges, Vec(n, m));
}

Vec plus(Vec a, double c) {
  for (double& x : a) x += c;
  return a;
}

}  // namespace

TEST_CASE("energy examples") {
  const auto g = unit_pair();
  CHECK(energy(g, Vec{3.0, 3.0}, 2.0) == 0.0);
  CHECK(energy(g, Vec{0.0, 1.0}, 2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(energy(g, Vec{0.0, 1.0}, 0.5), ValidationError);

  instances::Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    auto h = instances::random_connected_graph(rng);
    auto f = instances::random_vector(rng, h.size());
    const double p = instances::uniform(rng, 1.0, 4.0);
    CHECK(energy(h, f, 2.0 ) >= 0.0);
    CHECK(energy(h, plus(f, 1.7), p) == doctest::Approx(energy(h, f, p)).epsilon(1e-12));
    Vec scaled = f;
    for (double& x : scaled) x *= 2.5;
    CHECK(energy(h, scaled, 2.0) == doctest::Approx(6.25 * energy(h, f, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("p-Laplacian formulas") {
  const auto g = unit_pair();
  const Vec d3 = p_laplacian(g, Vec{0.0, 1.0}, 3.0);
  CHECK(d3[0] == doctest::Approx(1.0));
  CHECK(d3[1] == doctest::Approx(-1.0));
  CHECK_THROWS_AS(p_laplacian(g, Vec{0.0, 1.0}, 1.0), ValidationError);
  CHECK_THROWS_AS(p_laplacian(g, Vec{0.0, 1.0}, 0.9), ValidationError);

  instances::Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    auto h = instances::random_connected_graph(rng);
    auto f = instances::random_vector(rng, h.size());
    CHECK(sup_distance(p_laplacian(h, f, 2.0), laplacian_apply(h, f)) == 0.0);
    for (double p : {1.5, 3.0}) {
      const Vec c = p_laplacian(h, Vec(h.size(), 0.4), p);
      CHECK(sup_norm(c) == 0.0);
    }
  }

  // With constant m, dE_p/df(z) = -p Delta_p f(z).
  for (int t = 0; t < 10; ++t) {
    auto h = constant_measure_graph(rng);
    auto f = instances::random_vector(rng, h.size());
    for (double p : {1.5, 2.0, 3.0}) {
      const Vec lap = p_laplacian(h, f, p);
      for (std::size_t z = 0; z < h.size(); ++z) {
        Vec a = f, b = f;
        a[z] += 1e-6;
        b[z] -= 1e-6;
        const double fd = (energy(h, a, p) - energy(h, b, p)) / 2e-6;
        CHECK(fd == doctest::Approx(-p * lap[z]).epsilon(1e-4).scale(1.0));
      }
    }
  }
}

TEST_CASE("Delta_1 membership") {
  const auto g = unit_pair();
  CHECK(p1_membership(g, Vec{2.0, 2.0}, Vec{0.0, 0.0}, Vec{0.0}).member);
  CHECK(p1_membership(g, Vec{2.0, 2.0}, Vec{0.5, -0.5}, Vec{0.5}).member);
  CHECK_FALSE(p1_membership(g, Vec{2.0, 2.0}, Vec{1.5, -1.5}, Vec{1.5}).member);
  CHECK(p1_membership(g, Vec{0.0, 1.0}, Vec{1.0, -1.0}, Vec{1.0}).member);
  CHECK_FALSE(p1_membership(g, Vec{0.0, 1.0}, Vec{0.5, -0.5}, Vec{0.5}).member);
}

TEST_CASE("resolvent examples") {
  const auto g = unit_pair();
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const auto c = resolvent(g, Vec{0.7, 0.7}, p, 0.3);
    CHECK(c.g[0] == 0.7);
    CHECK(c.g[1] == 0.7);
    CHECK(c.residual == 0.0);
  }
  const auto s = resolvent(g, Vec{0.0, 1.0}, 2.0, 1.0);
  CHECK(s.g[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(s.g[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  // p = 1 on two vertices: g = f + eps (1, -1) until the values meet.
  const auto t = resolvent(g, Vec{0.0, 1.0}, 1.0, 0.2);
  CHECK(t.g[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(t.g[1] == doctest::Approx(0.8).epsilon(1e-12));
  const auto u = resolvent(g, Vec{0.0, 1.0}, 1.0, 2.0);
  CHECK(u.g[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(u.g[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(u.selection[0] == doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(resolvent(g, Vec{0.0, 1.0}, 2.0, 0.0), ValidationError);
  CHECK_THROWS_AS(resolvent(g, Vec{0.0}, 2.0, 0.1), ValidationError);
}

TEST_CASE("p = 2 resolvent matches the direct linear solve") {
  instances::Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    auto h = instances::random_connected_graph(rng);
    auto f = instances::random_vector(rng, h.size(), -3.0, 3.0);
    const double eps = instances::uniform(rng, 0.01, 2.0);
    const Vec oracle_g = oracle::linear_resolvent(h, f, eps);
    CHECK(sup_distance(resolvent(h, f, 2.0, eps).g, oracle_g) < 1e-8);
    CHECK(sup_distance(resolvent_linear(h, f, eps), oracle_g) < 1e-8);
  }
}

TEST_CASE("resolvent contract for p in {1, 1.5, 2, 3}") {
  instances::Rng rng(17);
  const double eps = 0.1;
  for (int t = 0; t < 25; ++t) {
    auto h = instances::random_connected_graph(rng, {.max_vertices = 8});
    const std::size_t n = h.size();
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      CAPTURE(p);
      CAPTURE(t);
      auto f = instances::random_vector(rng, n, -2.0, 2.0);
      Vec lower = f;
      for (double& x : lower) x -= instances::uniform(rng, 0.0, 0.5);
      const auto jf = resolvent(h, f, p, eps);
      const auto jl = resolvent(h, lower, p, eps);
      CHECK(jf.residual < 1e-7);
      CHECK(jl.residual < 1e-7);
      for (std::size_t x = 0; x < n; ++x) CHECK(jf.g[x] >= jl.g[x] - 1e-10);
      CHECK(sup_distance(jf.g, jl.g) <= sup_distance(f, lower) + 1e-10);

      const auto jc = resolvent(h, plus(f, 0.8), p, eps);
      CHECK(sup_distance(jc.g, plus(jf.g, 0.8)) < 1e-9);

      // Strict monotonicity: a bump of delta |V| at x lifts J f(x) by delta.
      const double delta = instances::uniform(rng, 0.01, 0.2);
      const std::size_t x = instances::uniform_index(rng, 0, n - 1);
      Vec bumped = lower;
      bumped[x] += delta * static_cast<double>(n);
      for (std::size_t y = 0; y < n; ++y)
        if (y != x) bumped[y] = std::max(bumped[y], lower[y]);
      const auto jb = resolvent(h, bumped, p, eps);
      CHECK(jb.g[x] >= jl.g[x] + delta - 1e-8);

      if (p == 1.0) {
        const Vec lap = p1_laplacian_value(h, jf.selection);
        Vec target(n);
        for (std::size_t y = 0; y < n; ++y) target[y] = (jf.g[y] - f[y]) / eps;
        CHECK(p1_membership(h, jf.g, target, jf.selection, 1e-7).member);
        CHECK(sup_distance(lap, target) < 1e-7);
      } else {
        const Vec lap = p_laplacian(h, jf.g, p);
        for (std::size_t y = 0; y < n; ++y)
          CHECK(std::abs(jf.g[y] - eps * lap[y] - f[y]) < 1e-9);
      }
    }
  }
}

TEST_CASE("variational gradient vanishes at the resolvent") {
  instances::Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    auto h = constant_measure_graph(rng);
    const double m = h.measure(0);
    auto f = instances::random_vector(rng, h.size());
    const double eps = 0.1;
    for (double p : {1.5, 2.0, 3.0}) {
      const Vec g = resolvent(h, f, p, eps).g;
      // Objective E_p / p + m |g - f|^2 / (2 eps) for constant m.
      auto obj = [&](const Vec& x) {
        double s = energy(h, x, p) * m / p;
        for (std::size_t i = 0; i < x.size(); ++i) s += m * (x[i] - f[i]) * (x[i] - f[i]) / (2 * eps);
        return s;
      };
      for (std::size_t z = 0; z < h.size(); ++z) {
        Vec a = g, b = g;
        a[z] += 1e-6;
        b[z] -= 1e-6;
        CHECK(std::abs(obj(a) - obj(b)) / 2e-6 < 1e-4 * (1.0 + std::abs(obj(g))));
      }
    }
  }
}

TEST_CASE("phi specifications") {
  auto p3 = PhiSpec::power(3.0);
  CHECK(p3(2.0) == doctest::Approx(4.0));
  CHECK(p3(-2.0) == doctest::Approx(-4.0));
  CHECK(p3.shape == PhiShape::convex);
  CHECK(PhiSpec::power(1.5).shape == PhiShape::concave);
  CHECK_THROWS_AS(PhiSpec::power(0.5), ValidationError);

  auto at = PhiSpec::custom("atan", [](double t) { return std::atan(t); }, PhiShape::concave);
  CHECK(at.antiderivative(1.0) == doctest::Approx(std::atan(1.0) - 0.5 * std::log(2.0)).epsilon(1e-9));
  CHECK_THROWS_AS(PhiSpec::custom("atan", [](double t) { return std::atan(t); }, PhiShape::convex),
                  ValidationError);
  CHECK_THROWS_AS(PhiSpec::custom("shifted", [](double t) { return t + 0.1; }, PhiShape::convex),
                  ValidationError);
  CHECK_THROWS_AS(PhiSpec::custom("cos", [](double t) { return std::sin(t); }, PhiShape::concave),
                  ValidationError);

  auto cubic = PhiSpec::custom("t+t^3", [](double t) { return t + t * t * t; }, PhiShape::convex,
                               [](double t) { return 1.0 + 3.0 * t * t; });
  instances::Rng rng(29);
  for (int t = 0; t < 10; ++t) {
    auto h = instances::random_connected_graph(rng);
    auto f = instances::random_vector(rng, h.size());
    for (const PhiSpec* phi : {&at, &cubic}) {
      const auto sol = resolvent(h, f, *phi, 0.2);
      const Vec lap = phi_laplacian(h, sol.g, *phi);
      for (std::size_t y = 0; y < h.size(); ++y)
        CHECK(std::abs(sol.g[y] - 0.2 * lap[y] - f[y]) < 1e-9);
    }
  }
}

TEST_CASE("Lipschitz decay examples") {
  const auto g = unit_pair();
  const auto two = PhiSpec::power(2.0);
  const auto c = lipschitz_decay_bound(g, Vec{1.0, 1.0}, two, 0.1, 0.0);
  CHECK(c.lhs == 0.0);
  CHECK(c.rhs == 0.0);
  CHECK(c.holds);

  const auto d = lipschitz_decay_bound(g, Vec{0.0, 1.0}, two, 0.5, 0.0);
  CHECK(d.curvature_min == doctest::Approx(0.0).scale(1.0));
  CHECK(d.lhs == doctest::Approx(0.5));
  CHECK(d.rhs == doctest::Approx(1.0));
  CHECK(d.holds);

  CHECK_THROWS_AS(lipschitz_decay_bound(g, Vec{0.0, 1.0}, two, 0.5, 0.3), PreconditionError);
  CHECK(admissible_epsilon(1.0, two, -20.0, 0.1) == doctest::Approx(0.025));
  CHECK(admissible_epsilon(0.0, two, -20.0, 0.1) == 0.1);
}

TEST_CASE("Lipschitz decay on complete graphs and random graphs") {
  instances::Rng rng(31);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    WeightedGraph h;
    if (t % 2 == 0) {
      const std::size_t n = instances::uniform_index(rng, 3, 6);
      h = instances::complete_graph(n, static_cast<double>(n - 1) * instances::uniform(rng, 1.0, 1.5));
    } else {
      instances::GraphParams params;
      params.max_vertices = 7;
      params.extra_edge_probability = 0.7;
      params.unit_lengths = true;
      h = instances::random_connected_graph(rng, params);
    }
    auto f = instances::random_vector(rng, h.size(), -1.0, 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
      const auto phi = PhiSpec::power(p);
      double k;
      try {
        k = min_modified_curvature(h, phi);
      } catch (const PreconditionError&) {
        continue;
      }
      const double lip = combinatorial_lipschitz(h, f);
      const double eps = admissible_epsilon(lip, phi, k, 0.1);
      const auto res = lipschitz_decay_bound(h, f, phi, eps, k);
      CAPTURE(p);
      CAPTURE(k);
      CHECK(res.holds);
      ++checked;
    }
  }
  CHECK(checked > 60);
}
