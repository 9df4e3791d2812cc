#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "modpot/errors.hpp"

namespace modpot::numerics {

// Scalar root-finding problem on a sign-changing bracket.
//
// `derivative` is optional; when present the solver takes Newton steps,
// otherwise secant steps through the two most recent iterates. Either kind
// of step is rejected in favour of bisection when it leaves the current
// bracket or fails to halve the residual.
template <std::floating_point Scalar>
struct RootProblem {
  std::function<Scalar(Scalar)> objective;
  std::function<Scalar(Scalar)> derivative;
  Scalar lo = 0;
  Scalar hi = 1;
  Scalar rel_tol = Scalar(1e-12);
  Scalar abs_tol = 0;  // absolute floor on the argument tolerance
  Scalar f_tol = 0;    // accept any iterate with |objective| <= f_tol
  int max_iter = 200;
  // Optional starting iterate inside the bracket; midpoint when NaN.
  Scalar guess = std::numeric_limits<Scalar>::quiet_NaN();
};

template <std::floating_point Scalar>
Scalar find_root(const RootProblem<Scalar>& prob) {
  Scalar a = prob.lo;
  Scalar b = prob.hi;
  if (!(a <= b)) throw DomainError("find_root: empty bracket");
  Scalar fa = prob.objective(a);
  Scalar fb = prob.objective(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if (!std::isfinite(fa) || !std::isfinite(fb) || std::signbit(fa) == std::signbit(fb)) {
    throw DomainError("find_root: objective does not change sign on [" + std::to_string(double(a)) +
                      ", " + std::to_string(double(b)) + "]");
  }
  // Orient so that f(a) < 0 < f(b) in the bookkeeping below.
  const bool increasing = fa < 0;

  auto tol_at = [&](Scalar x) { return prob.rel_tol * std::abs(x) + prob.abs_tol; };

  Scalar x = std::isnan(prob.guess) ? (a + b) / 2 : prob.guess;
  if (!(x > a && x < b)) x = (a + b) / 2;
  Scalar fx = prob.objective(x);
  Scalar x_prev = (fa * fa < fb * fb) ? a : b;
  Scalar f_prev = (x_prev == a) ? fa : fb;

  for (int iter = 0; iter < prob.max_iter; ++iter) {
    if (fx == 0 || std::abs(fx) <= prob.f_tol) return x;
    if ((fx < 0) == increasing) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    if (b - a <= 2 * tol_at(x)) return x;

    Scalar candidate = std::numeric_limits<Scalar>::quiet_NaN();
    if (prob.derivative) {
      const Scalar d = prob.derivative(x);
      if (d != 0 && std::isfinite(d)) candidate = x - fx / d;
    } else if (fx != f_prev) {
      candidate = x - fx * (x - x_prev) / (fx - f_prev);
    }
    const bool usable = std::isfinite(candidate) && candidate > a && candidate < b &&
                        std::abs(fx) <= std::abs(f_prev) / 2;
    const Scalar next = usable ? candidate : (a + b) / 2;

    // Converged on a Newton/secant step small relative to the iterate.
    if (usable && std::abs(next - x) <= tol_at(x)) return next;

    x_prev = x;
    f_prev = fx;
    x = next;
    fx = prob.objective(x);
    if (!std::isfinite(fx)) throw ConvergenceError("find_root: non-finite objective");
  }
  throw ConvergenceError("find_root: exceeded " + std::to_string(prob.max_iter) + " iterations");
}

// Convenience overload for callables.
template <std::floating_point Scalar, class F>
Scalar find_root(F&& f, Scalar lo, Scalar hi, Scalar rel_tol = Scalar(1e-12), int max_iter = 200) {
  RootProblem<Scalar> prob;
  prob.objective = std::forward<F>(f);
  prob.lo = lo;
  prob.hi = hi;
  prob.rel_tol = rel_tol;
  prob.max_iter = max_iter;
  return find_root(prob);
}

// log(1 + exp(x)) without overflow.
template <std::floating_point Scalar>
Scalar softplus(Scalar x) {
  return (x > 0 ? x : Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
}

// 1 / (1 + exp(-x)) without overflow.
template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= 0) return 1 / (1 + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (1 + e);
}

enum class SingularEnd { None, Lower, Upper };

struct QuadratureResult {
  double value = 0;
  double error = 0;  // estimated absolute error
  int panels = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 40;
  int max_panels = 200000;
};

// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
//
// An inverse-square-root singularity at the flagged end is removed by the
// substitution x = b - u^2 (Upper) or x = a + u^2 (Lower), after which the
// integrand is bounded. f is never evaluated at a flagged endpoint.
QuadratureResult integrate_singular(const std::function<double(double)>& f, double a, double b,
                                    SingularEnd singular_end, QuadratureOptions opts = {});

inline QuadratureResult integrate_singular(const std::function<double(double)>& f, double a,
                                           double b, SingularEnd singular_end, double abs_tol) {
  QuadratureOptions opts;
  opts.abs_tol = abs_tol;
  return integrate_singular(f, a, b, singular_end, opts);
}

// As integrate_singular, with f(x, d) also receiving d = |x - flagged end|
// (d = b - x when no end is flagged) as the exact u^2 of the substitution,
// free of the cancellation in b - x.
QuadratureResult integrate_singular_offset(const std::function<double(double, double)>& f,
                                           double a, double b, SingularEnd singular_end,
                                           QuadratureOptions opts = {});

inline QuadratureResult integrate_singular_offset(const std::function<double(double, double)>& f,
                                                  double a, double b, SingularEnd singular_end,
                                                  double abs_tol) {
  QuadratureOptions opts;
  opts.abs_tol = abs_tol;
  return integrate_singular_offset(f, a, b, singular_end, opts);
}

// Carlson symmetric integrals (real arguments).
double carlson_rf(double x, double y, double z);
double carlson_rd(double x, double y, double z);

// How the second argument of the Legendre integrals is read.
//   Parameter: F(phi | m) = int_0^phi dt / sqrt(1 - m sin^2 t)
//   Modulus:   F(phi, k) = F(phi | k^2)
enum class EllipticConvention { Parameter, Modulus };

// Incomplete elliptic integral of the first kind. Negative parameter allowed;
// requires 1 - m sin^2(phi) >= 0 and 0 <= phi <= pi/2.
double elliptic_F(double phi, double m, EllipticConvention conv = EllipticConvention::Parameter);
// Incomplete elliptic integral of the second kind, same conventions.
double elliptic_E(double phi, double m, EllipticConvention conv = EllipticConvention::Parameter);

}  // namespace modpot::numerics
