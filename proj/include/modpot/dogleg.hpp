#pragma once

// The dogleg family of moderation incentives
//
//   C(z, u) = mu(z) / (p alpha) * (1 - Q_z(u)^{p/2})^alpha,   0 < alpha <= 1 <= p,
//
// reduced to the scalar problem of maximizing  l s + (1 - s^p)^alpha / (alpha p)
// over the scaling s in [0, 1], where l = ell / mu is the moderation-normalized
// covector magnitude. The maximizer is the optimal scaling sigma; its
// interior critical-point equation is rho(s) = l with
//
//   rho(s) = s^{p-1} (1 - s^p)^{alpha-1}.
//
// Everything here is a pure function of its arguments.

#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include "modpot/errors.hpp"
#include "modpot/numerics.hpp"

namespace modpot {

// Shape parameters (alpha, p) of the incentive family.
// Invariant: 0 < alpha <= 1, p >= 1, and (alpha, p) != (1, 1).
template <std::floating_point Scalar>
class BasicDoglegParams {
 public:
  BasicDoglegParams(Scalar alpha, Scalar p) : alpha_(alpha), p_(p) {
    if (!(alpha > 0 && alpha <= 1)) {
      throw DomainError("dogleg: alpha must lie in (0, 1], got " + std::to_string(double(alpha)));
    }
    if (!(p >= 1) || !std::isfinite(p)) {
      throw DomainError("dogleg: p must be >= 1, got " + std::to_string(double(p)));
    }
    if (alpha == 1 && p == 1) throw DomainError("dogleg: alpha = p = 1 is excluded");
  }

  Scalar alpha() const { return alpha_; }
  Scalar p() const { return p_; }
  // Hoelder conjugate q = p / (p - 1); infinite for p = 1.
  Scalar q() const {
    return p_ == 1 ? std::numeric_limits<Scalar>::infinity() : p_ / (p_ - 1);
  }
  bool saturating() const { return alpha_ == 1; }
  // alpha * p == 1, where closed forms exist.
  bool reciprocal() const {
    return alpha_ < 1 && std::abs(alpha_ * p_ - 1) <= 8 * std::numeric_limits<Scalar>::epsilon();
  }

  friend bool operator==(const BasicDoglegParams&, const BasicDoglegParams&) = default;

 private:
  Scalar alpha_;
  Scalar p_;
};

using DoglegParams = BasicDoglegParams<double>;

// Solution of rho(s) = r reported in both s and w = 1 - s^p, each to full
// relative precision (w matters when s is close to 1).
template <std::floating_point Scalar>
struct Scaling {
  Scalar s;
  Scalar w;
};

namespace detail {

// Solves s^{p-1} (1 - s^p)^{alpha-1} = r for alpha in [0, 1), p >= 1.
//
// Works in the logit variable y = log(t / (1 - t)) with t = s^p, where
//   log rho = -(p-1)/p softplus(-y) + (1-alpha) softplus(y)
// is strictly increasing with slope between min((p-1)/p, 1-alpha) and
// max(...), so safeguarded Newton converges from any bracket.
template <std::floating_point Scalar>
Scaling<Scalar> invert_rho(Scalar alpha, Scalar p, Scalar r) {
  using numerics::sigmoid;
  using numerics::softplus;
  if (!(r >= 0)) throw DomainError("rho_inverse: argument must be non-negative");
  if (r == 0) return {0, 1};
  if (std::isinf(r)) return {1, 0};
  if (p == 1 && r <= 1) {
    // rho_{alpha,1} has range [1, inf): the scalar objective is maximized at s = 0.
    return {0, 1};
  }
  const Scalar a = (p - 1) / p;
  const Scalar b = 1 - alpha;
  const Scalar log_r = std::log(r);
  auto g = [&](Scalar y) { return -a * softplus(-y) + b * softplus(y) - log_r; };
  auto dg = [&](Scalar y) {
    const Scalar t = sigmoid(y);
    return a * (1 - t) + b * t;
  };

  Scalar lo = -1, hi = 1;
  while (g(lo) > 0) {
    lo *= 2;
    if (lo < Scalar(-1e6)) throw ConvergenceError("rho_inverse: bracket search failed");
  }
  while (g(hi) < 0) {
    hi *= 2;
    if (hi > Scalar(1e6)) throw ConvergenceError("rho_inverse: bracket search failed");
  }
  numerics::RootProblem<Scalar> prob;
  prob.objective = g;
  prob.derivative = dg;
  prob.lo = lo;
  prob.hi = hi;
  prob.rel_tol = Scalar(1e-15);
  prob.abs_tol = Scalar(1e-15);
  prob.max_iter = 200;
  // Asymptotic guesses: y ~ log r / a for small r, y ~ log r / b for large r.
  prob.guess = log_r < 0 ? (a > 0 ? log_r / a : lo) : (b > 0 ? log_r / b : hi);
  const Scalar y = numerics::find_root(prob);
  const Scalar log_t = -softplus(-y);
  return {std::exp(log_t / p), sigmoid(-y)};
}

}  // namespace detail

// The incentive value mu / (p alpha) (1 - q_u^{p/2})^alpha for q_u = Q_z(u).
template <std::floating_point Scalar>
Scalar incentive_value(const BasicDoglegParams<Scalar>& params, Scalar mu, Scalar q_u) {
  if (!(q_u >= 0 && q_u <= 1)) {
    throw DomainError("incentive_value: control outside the admissible region (Q = " +
                      std::to_string(double(q_u)) + ")");
  }
  if (!(mu > 0)) throw DomainError("incentive_value: mu must be positive");
  const Scalar alpha = params.alpha(), p = params.p();
  return mu / (p * alpha) * std::pow(1 - std::pow(q_u, p / 2), alpha);
}

// rho(s) = s^{p-1} (1 - s^p)^{alpha-1}. Strictly increasing; has a pole at
// s = 1 when alpha < 1.
template <std::floating_point Scalar>
Scalar rho(const BasicDoglegParams<Scalar>& params, Scalar s) {
  const Scalar alpha = params.alpha(), p = params.p();
  if (!(s >= 0)) throw DomainError("rho: s must be non-negative");
  if (alpha < 1 ? !(s < 1) : !(s <= 1)) throw DomainError("rho: s outside the domain");
  return std::pow(s, p - 1) * std::pow(1 - std::pow(s, p), alpha - 1);
}

// Inverse of rho with both s and w = 1 - s^p. For alpha = 1 the inverse is
// s = r^{1/(p-1)} and exists only for r <= 1.
template <std::floating_point Scalar>
Scaling<Scalar> rho_inverse_scaling(const BasicDoglegParams<Scalar>& params, Scalar r) {
  if (params.saturating()) {
    if (!(r >= 0 && r <= 1)) throw DomainError("rho_inverse: alpha = 1 requires r in [0, 1]");
    const Scalar s = std::pow(r, 1 / (params.p() - 1));
    return {s, 1 - std::pow(s, params.p())};
  }
  return detail::invert_rho(params.alpha(), params.p(), r);
}

template <std::floating_point Scalar>
Scalar rho_inverse(const BasicDoglegParams<Scalar>& params, Scalar r) {
  return rho_inverse_scaling(params, r).s;
}

// Optimal scaling through the general route (rho inversion or the alpha = 1
// min formula); skips the alpha p = 1 closed form.
template <std::floating_point Scalar>
Scalar sigma_general(const BasicDoglegParams<Scalar>& params, Scalar ell_mu) {
  if (!(ell_mu >= 0)) throw DomainError("sigma: ell_mu must be non-negative");
  if (params.saturating()) {
    return std::min(std::pow(ell_mu, 1 / (params.p() - 1)), Scalar(1));
  }
  return detail::invert_rho(params.alpha(), params.p(), ell_mu).s;
}

// Closed-form scaling (1 + l^{-q})^{-1/p} valid when alpha p = 1.
template <std::floating_point Scalar>
Scalar sigma_reciprocal(Scalar p, Scalar ell_mu) {
  if (ell_mu == 0) return 0;
  const Scalar q = p / (p - 1);
  const Scalar lq = std::pow(ell_mu, q);
  return std::pow(lq / (1 + lq), 1 / p);
}

// Optimal scaling sigma(l): the maximizer over [0, 1] of
// l s + (1 - s^p)^alpha / (alpha p).
template <std::floating_point Scalar>
Scalar sigma(const BasicDoglegParams<Scalar>& params, Scalar ell_mu) {
  if (!(ell_mu >= 0)) throw DomainError("sigma: ell_mu must be non-negative");
  if (params.reciprocal()) {
    if (std::isinf(ell_mu)) return 1;
    return sigma_reciprocal(params.p(), ell_mu);
  }
  return sigma_general(params, ell_mu);
}

// Inverse of the logarithmic-penalty response s^{p-1} / (1 - s^p), the
// alpha -> 0 limit of rho.
template <std::floating_point Scalar>
Scalar sigma_log_limit(Scalar p, Scalar ell_mu) {
  if (!(p > 1)) throw DomainError("sigma_log_limit: p must exceed 1");
  if (!(ell_mu >= 0)) throw DomainError("sigma_log_limit: ell_mu must be non-negative");
  if (ell_mu == 0) return 0;
  if (p == 2) {
    // Root of r s^2 + s - r = 0, rationalized to avoid cancellation.
    return 2 * ell_mu / (1 + std::sqrt(1 + 4 * ell_mu * ell_mu));
  }
  return detail::invert_rho(Scalar(0), p, ell_mu).s;
}

// Grid argmax of the scalar objective over grid_n equispaced s in [0, 1];
// lowest index wins ties. Independent of the inversion machinery.
template <std::floating_point Scalar>
Scalar brute_force_sigma(const BasicDoglegParams<Scalar>& params, Scalar ell_mu, int grid_n) {
  if (grid_n < 101) throw DomainError("brute_force_sigma: grid_n must be >= 101");
  const Scalar alpha = params.alpha(), p = params.p();
  Scalar best_s = 0;
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < grid_n; ++i) {
    const Scalar s = Scalar(i) / Scalar(grid_n - 1);
    const Scalar value = ell_mu * s + std::pow(1 - std::pow(s, p), alpha) / (alpha * p);
    if (value > best) {
      best = value;
      best_s = s;
    }
  }
  return best_s;
}

}  // namespace modpot
