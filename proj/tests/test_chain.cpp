#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "instances.hpp"
#include "nlmc/chain.hpp"
#include "nlmc/error.hpp"
#include "nlmc/graph.hpp"
#include "oracles.hpp"

using namespace nlmc;

namespace {

Matrix random_stochastic(instances::Rng& rng, std::size_t n) {
  Matrix a(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      a(r, c) = instances::uniform(rng, 0.0, 1.0) < 0.6 || r == c ? instances::uniform(rng, 0.1, 1.0) : 0.0;
      s += a(r, c);
    }
    for (std::size_t c = 0; c < n; ++c) a(r, c) /= s;
  }
  return a;
}

Matrix random_nonneg(instances::Rng& rng, std::size_t n) {
  Matrix a(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c)
      a(r, c) = instances::uniform(rng, 0.0, 1.0) < 0.7 ? instances::uniform(rng, 0.1, 2.0) : 0.0;
    a(r, r) += 0.5;
    a(r, (r + 1) % n) += 0.3;  // irreducible and aperiodic
  }
  return a;
}

}  // namespace

TEST_CASE("lazy two-state chain") {
  Matrix a(2, 2, 0.5);
  auto p = linear_operator(a);
  auto res = iterate_normalized(p, {0.0, 1.0}, 0);
  REQUIRE(res.status == IterationStatus::converged);
  CHECK(std::abs((*res.limit)[1]) < 1e-9);
  CHECK(std::abs(*res.growth) < 1e-9);
}

TEST_CASE("identity converges at once") {
  auto res = iterate_normalized(identity_operator(3), {2.0, 5.0, -1.0}, 0);
  REQUIRE(res.status == IterationStatus::converged);
  CHECK(res.iterations == 1);
  CHECK(*res.limit == Vec{0.0, 3.0, -3.0});
  CHECK(*res.growth == 0.0);
}

TEST_CASE("lambda diagnostics") {
  auto id = identity_operator(3);
  auto d = lambda_diagnostics(id, Vec{1.0, 2.0, 3.0});
  CHECK(d.plus == 0.0);
  CHECK(d.minus == 0.0);

  instances::Rng rng(1);
  auto p = perron_frobenius_operator({random_nonneg(rng, 4)});
  Vec f = instances::random_vector(rng, 4);
  Vec fc = f;
  for (double& v : fc) v += 7.25;
  auto a = lambda_diagnostics(p, f);
  auto b = lambda_diagnostics(p, fc);
  CHECK(a.plus == doctest::Approx(b.plus).epsilon(1e-12));
  CHECK(a.minus == doctest::Approx(b.minus).epsilon(1e-12));
  CHECK(a.argmax == b.argmax);
}

TEST_CASE("lambda bounds are monotone along traces") {
  instances::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = instances::uniform_index(rng, 2, 6);
    ChainOperator p = trial % 2 ? linear_operator(random_stochastic(rng, n))
                                : perron_frobenius_operator({random_nonneg(rng, n)});
    auto res = iterate_normalized(p, instances::random_vector(rng, n, -3.0, 3.0), 0);
    CHECK(res.status == IterationStatus::converged);
    for (std::size_t k = 1; k < res.trace.size(); ++k) {
      CHECK(res.trace[k].lambda_plus <= res.trace[k - 1].lambda_plus + 1e-12);
      CHECK(res.trace[k].lambda_minus >= res.trace[k - 1].lambda_minus - 1e-12);
    }
  }
}

TEST_CASE("non-expansion along orbits") {
  instances::Rng rng(3);
  auto p = perron_frobenius_operator({random_nonneg(rng, 5), random_nonneg(rng, 5)});
  Vec f = instances::random_vector(rng, 5), g = instances::random_vector(rng, 5);
  double prev = sup_distance(f, g);
  for (int k = 0; k < 30; ++k) {
    f = p(f);
    g = p(g);
    const double cur = sup_distance(f, g);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("stationarity of the limit") {
  instances::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = perron_frobenius_operator({random_nonneg(rng, 4)});
    const double tol = 1e-10;
    IterationOptions opts;
    opts.tolerance = tol;
    auto res = iterate_normalized(p, instances::random_vector(rng, 4), 2, opts);
    REQUIRE(res.status == IterationStatus::converged);
    Vec g = *res.limit;
    const double base = res.last[2];
    for (double& v : g) v += base;
    Vec pg = p(g);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(pg[i] - g[i] - *res.growth) < 10 * tol);
  }
}

TEST_CASE("counterexample") {
  const double eps0 = 0.01;
  auto p = counterexample_operator(eps0);
  const Vec f0 = counterexample_start(eps0);
  const Vec pf = p(f0);
  CHECK(pf == Vec{1.0, -1.0, eps0, -eps0});
  const Vec ppf = p(pf);
  CHECK(ppf[0] - pf[0] == 1.0);

  IterationOptions opts;
  opts.tolerance = 1e-3;
  opts.renormalize = false;
  opts.max_iterations = 100;
  opts.detect_oscillation = false;
  std::size_t checked = 0;
  Vec f = f0;
  CHECK(f[2] - f[3] == -2 * eps0);
  for (int n = 1; n <= 100; ++n) {
    f = p(f);
    CHECK(f[2] - f[3] == (n % 2 ? 2 * eps0 : -2 * eps0));
    ++checked;
  }
  CHECK(checked == 100);

  opts.detect_oscillation = true;
  auto res = iterate_normalized(p, f0, 0, opts);
  CHECK(res.status == IterationStatus::oscillating);
  CHECK(res.iterations <= 4);

  opts.renormalize.reset();
  auto res2 = iterate_normalized(p, f0, 0, opts);
  CHECK(res2.status == IterationStatus::oscillating);
}

TEST_CASE("extension operator") {
  const double eps0 = 0.01;
  auto p = counterexample_operator(eps0);
  // On the family: exact values and constant additivity.
  Vec member{3.0 + 0.7, -3.0 + 0.7, eps0 + 0.7, -eps0 + 0.7};
  Vec pm = p(member);
  CHECK(pm[0] == doctest::Approx(4.7));
  CHECK(pm[2] == doctest::Approx(0.7 - eps0));

  instances::Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    Vec f = instances::random_vector(rng, 4, -3.0, 3.0);
    Vec lower = f;
    for (double& v : lower) v -= instances::uniform(rng, 0.0, 1.0);
    const Vec pf = p(f);
    const Vec pl = p(lower);
    for (std::size_t i = 0; i < 4; ++i) CHECK(pf[i] >= pl[i] + 0.5 * (f[i] - lower[i]) - 1e-9);
    const double c = instances::uniform(rng, -2.0, 2.0);
    Vec fc = f;
    for (double& v : fc) v += c;
    const Vec pfc = p(fc);
    for (std::size_t i = 0; i < 4; ++i) CHECK(pfc[i] == doctest::Approx(pf[i] + c).epsilon(1e-9));
  }

  auto empty = extend_operator(identity_operator(2), 0.5, [](std::span<const double>) {
    return std::vector<Vec>{};
  });
  CHECK_THROWS_AS(empty(Vec{0.0, 1.0}), PreconditionError);
}

TEST_CASE("verify_properties") {
  instances::Rng rng(6);
  auto stochastic = linear_operator(random_stochastic(rng, 4));
  auto rep = verify_properties(stochastic, 200, 5.0, 42);
  CHECK(rep.condition(1).passed);
  CHECK(rep.condition(2).passed);
  CHECK(rep.condition(4).passed);
  CHECK(rep.condition(5).passed);

  auto shift = shift_operator(3, 1.0);
  auto rs = verify_properties(shift, 100, 2.0, 1);
  CHECK(rs.condition(1).passed);
  CHECK(rs.condition(4).passed);
  CHECK(rs.condition(5).passed);
  CHECK_FALSE(rs.condition(6).passed);  // f - g never spreads

  Matrix two = Matrix::identity(3);
  for (std::size_t i = 0; i < 3; ++i) two(i, i) = 2.0;
  auto doubling = linear_operator(two, "double");
  auto rd = verify_properties(doubling, 50, 1.0, 3);
  CHECK_FALSE(rd.condition(5).passed);
  CHECK(rd.condition(5).witness_ratio == doctest::Approx(2.0));

  // Same seed, same report.
  auto again = verify_properties(stochastic, 200, 5.0, 42);
  CHECK(again.condition(3).estimate == rep.condition(3).estimate);

  auto pf = perron_frobenius_operator({random_nonneg(rng, 3)});
  auto rp = verify_properties(pf, 100, 3.0, 9);
  for (int k = 1; k <= 5; ++k) CHECK(rp.condition(k).passed);
}

TEST_CASE("perron-frobenius chain") {
  Matrix ones(2, 2, 1.0);
  auto p = perron_frobenius_operator({ones});
  IterationOptions opts;
  opts.tolerance = 1e-12;
  auto res = iterate_normalized(p, {0.0, std::log(3.0)}, 0, opts);
  REQUIRE(res.status == IterationStatus::converged);
  CHECK(std::abs((*res.limit)[1]) < 1e-10);
  CHECK(std::exp(2 * *res.growth) == doctest::Approx(2.0).epsilon(1e-10));

  Matrix swap(2, 2);
  swap(0, 1) = swap(1, 0) = 1.0;
  auto ps = perron_frobenius_operator({swap});
  auto rs = iterate_normalized(ps, {0.0, 0.0}, 0, opts);
  REQUIRE(rs.status == IterationStatus::converged);
  CHECK(rs.iterations == 1);
  CHECK(*rs.growth == 0.0);

  instances::Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = instances::uniform_index(rng, 2, 6);
    Matrix a = random_nonneg(rng, n);
    auto single = iterate_normalized(perron_frobenius_operator({a}), Vec(n, 0.0), 0, opts);
    REQUIRE(single.status == IterationStatus::converged);
    auto eig = oracle::power_iteration(a);
    CHECK(std::exp(2 * *single.growth) == doctest::Approx(eig.value).epsilon(1e-9));
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::exp((*single.limit)[i]) ==
            doctest::Approx(eig.vector[i] / eig.vector[0]).epsilon(1e-8));

    Matrix diag_heavy = random_nonneg(rng, n);
    for (std::size_t i = 0; i < n; ++i) diag_heavy(i, i) += 3.0;
    Matrix swap_heavy = random_nonneg(rng, n);
    for (std::size_t i = 0; i < n; ++i) swap_heavy(i, n - 1 - i) += 3.0;
    std::vector<Matrix> fam{diag_heavy, swap_heavy};
    auto both = iterate_normalized(perron_frobenius_operator(fam), Vec(n, 0.0), 0, opts);
    REQUIRE(both.status == IterationStatus::converged);
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp((*both.limit)[i]);
    Vec lv = min_family_apply(fam, v);
    const double factor = std::exp(2 * *both.growth);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(lv[i] - factor * v[i]) < 1e-8 * (1 + lv[i]));
  }

  Matrix zero_row(2, 2);
  zero_row(0, 0) = 1.0;
  CHECK_THROWS_AS(perron_frobenius_operator({zero_row}), ValidationError);
}

TEST_CASE("non-finite output aborts") {
  ChainOperator bad;
  bad.dimension = 1;
  bad.name = "bad";
  bad.map = [](std::span<const double>) { return Vec{std::nan("")}; };
  CHECK_THROWS_AS(iterate_normalized(bad, {0.0}, 0), SolverError);
}

TEST_CASE("unbounded normalized orbit is reported") {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 1.0;
  IterationOptions opts;
  opts.divergence_bound = 1e6;
  auto res = iterate_normalized(linear_operator(a), {1.0, 0.0}, 1, opts);
  CHECK(res.status == IterationStatus::diverged_unbounded);
}
