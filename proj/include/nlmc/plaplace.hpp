#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "nlmc/curvature.hpp"
#include "nlmc/graph.hpp"

namespace nlmc {

// Odd increasing scalar map phi driving Delta_phi f(x) = sum_y w(x,y)/m(x) phi(f(y) - f(x)).
struct PhiSpec {
  enum class Kind { p_power, custom };

  Kind kind = Kind::p_power;
  double p = 2.0;  // p-power only: phi(t) = |t|^{p-2} t
  std::string name;
  PhiShape shape = PhiShape::concave;  // shape on t > 0
  std::function<double(double)> phi;
  std::function<double(double)> dphi;  // derivative; finite differences when empty
  std::function<double(double)> psi;   // antiderivative with psi(0) = 0; quadrature when empty

  static PhiSpec power(double p);
  // Throws ValidationError when phi is not odd, not strictly increasing or
  // does not match the declared shape on a sample grid.
  static PhiSpec custom(std::string name, std::function<double(double)> phi, PhiShape shape,
                        std::function<double(double)> dphi = {},
                        std::function<double(double)> psi = {});

  double operator()(double t) const;
  double derivative(double t) const;
  double antiderivative(double t) const;
  void validate() const;
};

// E_p(f) = 1/2 sum_x sum_y w(x,y)/m(x) |f(y) - f(x)|^p
double energy(const WeightedGraph& g, std::span<const double> f, double p);

// Single-valued p-Laplacian for p > 1. Throws ValidationError for p <= 1;
// p = 1 is handled by the membership test below.
Vec p_laplacian(const WeightedGraph& g, std::span<const double> f, double p);
Vec phi_laplacian(const WeightedGraph& g, std::span<const double> f, const PhiSpec& phi);

// Value (1/m(x)) sum_y w(x,y) f_xy of an antisymmetric edge selection. The
// selection holds f_uv for every edge (u, v) in edges() order, f_vu = -f_uv.
Vec p1_laplacian_value(const WeightedGraph& g, std::span<const double> selection);

struct MembershipCheck {
  bool member = false;
  double selection_violation = 0.0;  // distance of the selection from sign(grad f)
  double value_violation = 0.0;      // sup |h - Delta_1 value of the selection|
};

// Tests h in Delta_1 f through the given selection.
MembershipCheck p1_membership(const WeightedGraph& g, std::span<const double> f,
                              std::span<const double> h, std::span<const double> selection,
                              double tolerance = 1e-9);

struct ResolventOptions {
  double residual_tolerance = 1e-11;  // relative to max(1, |f|_inf)
  std::size_t max_newton_steps = 400;
};

struct ResolventSolution {
  Vec g;
  double residual = 0.0;  // sup |g - eps Delta g - f|, with the selection for p = 1
  Vec selection;          // p = 1 only, edges() order
  std::size_t newton_steps = 0;
};

// J_eps f = (id - eps Delta_p)^{-1} f as the minimizer of
//   sum_e w_e |grad_e g|^p / p + sum_x m(x) (g(x) - f(x))^2 / (2 eps).
// Throws ConvergenceError when the residual target is missed.
ResolventSolution resolvent(const WeightedGraph& g, std::span<const double> f, double p,
                            double eps, const ResolventOptions& opts = {});
ResolventSolution resolvent(const WeightedGraph& g, std::span<const double> f,
                            const PhiSpec& phi, double eps, const ResolventOptions& opts = {});

// Direct solve of (id - eps Delta) g = f.
Vec resolvent_linear(const WeightedGraph& g, std::span<const double> f, double eps);

// max over edges of |f(y) - f(x)|, the Lipschitz constant for the
// combinatorial distance.
double combinatorial_lipschitz(const WeightedGraph& g, std::span<const double> f);

// Minimum of the modified curvature over all edges for the shape of phi.
double min_modified_curvature(const WeightedGraph& g, const PhiSpec& phi);

// Largest eps0 / 2^k (k >= 0) with 1 + eps L^{-1} phi(L) K > 0.
double admissible_epsilon(double lip, const PhiSpec& phi, double k, double eps0 = 0.1);

struct DecayCheck {
  double lip_f = 0.0;
  double lhs = 0.0;  // Lip(J_eps f)
  double rhs = 0.0;  // Lip(f) / (1 + eps Lip(f)^{-1} phi(Lip(f)) K)
  double epsilon = 0.0;
  double k = 0.0;
  double curvature_min = 0.0;
  double residual = 0.0;
  bool holds = false;
};

// Throws PreconditionError when K exceeds the minimum modified curvature or
// the positivity condition on eps fails.
DecayCheck lipschitz_decay_bound(const WeightedGraph& g, std::span<const double> f,
                                 const PhiSpec& phi, double eps, double k,
                                 double slack = 1e-8);

}  // namespace nlmc
