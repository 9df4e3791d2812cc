#include "modpot/potential.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace modpot {

namespace {

void require_interior_alpha(const DoglegParams& params, const char* what) {
  if (params.saturating()) {
    throw DomainError(std::string(what) + ": requires alpha < 1");
  }
}

}  // namespace

double tau(const DoglegParams& params, double w) {
  require_interior_alpha(params, "tau");
  if (!(w > 0 && w <= 1)) throw DomainError("tau: w must lie in (0, 1]");
  const double alpha = params.alpha(), p = params.p();
  return std::pow(w, alpha - 1) * (1 + (1 / (alpha * p) - 1) * w);
}

TauRoot tau_inverse_root(const DoglegParams& params, double phi) {
  using numerics::sigmoid;
  using numerics::softplus;
  require_interior_alpha(params, "tau_inverse");
  const double alpha = params.alpha(), p = params.p();
  const double floor = 1 / (alpha * p);
  if (!(phi >= floor)) {
    throw DomainError("tau_inverse: phi = " + std::to_string(phi) +
                      " below the range infimum " + std::to_string(floor));
  }
  if (phi == floor) return {1, 0};
  if (std::isinf(phi)) return {0, 1};
  const double c = floor - 1;
  const double log_phi = std::log(phi);
  // y = logit(w); log tau is strictly decreasing in y.
  auto g = [&](double y) {
    const double w = sigmoid(y);
    return (alpha - 1) * -softplus(-y) + std::log1p(c * w) - log_phi;
  };
  auto dg = [&](double y) {
    const double w = sigmoid(y);
    return ((alpha - 1) + c * w / (1 + c * w)) * (1 - w);
  };
  double lo = -1, hi = 1;
  while (g(lo) < 0) {
    lo *= 2;
    if (lo < -1e6) throw ConvergenceError("tau_inverse: bracket search failed");
  }
  while (g(hi) > 0) {
    hi *= 2;
    if (hi > 1e6) throw ConvergenceError("tau_inverse: bracket search failed");
  }
  numerics::RootProblem<double> prob;
  prob.objective = g;
  prob.derivative = dg;
  prob.lo = lo;
  prob.hi = hi;
  prob.rel_tol = 1e-15;
  prob.abs_tol = 1e-15;
  const double y = numerics::find_root(prob);
  return {sigmoid(y), sigmoid(-y)};
}

double tau_inverse(const DoglegParams& params, double phi) {
  return tau_inverse_root(params, phi).w;
}

double phi_floor(const DoglegParams& params) { return 1 / (params.alpha() * params.p()); }

double chi_hat_general(const DoglegParams& params, double r) {
  if (!(r >= 0)) throw DomainError("chi_hat: r must be non-negative");
  if (params.saturating()) {
    const double p = params.p(), q = params.q();
    return r < 1 ? 1 / p + std::pow(r, q) / q : r;
  }
  const Scaling<double> sc = detail::invert_rho(params.alpha(), params.p(), r);
  if (sc.w == 0) return std::numeric_limits<double>::infinity();
  return tau(params, sc.w);
}

double chi_hat(const DoglegParams& params, double r) {
  if (!(r >= 0)) throw DomainError("chi_hat: r must be non-negative");
  if (params.reciprocal()) {
    const double q = params.q();
    if (r <= 1) return std::pow(std::pow(r, q) + 1, 1 / q);
    return r * std::pow(1 + std::pow(r, -q), 1 / q);
  }
  return chi_hat_general(params, r);
}

double chi_hat_inverse(const DoglegParams& params, double phi) {
  const double floor = phi_floor(params);
  if (!(phi >= floor)) {
    throw DomainError("chi_hat_inverse: phi = " + std::to_string(phi) +
                      " below the range of chi_hat (" + std::to_string(floor) + ")");
  }
  const double p = params.p(), q = params.q();
  if (params.saturating()) {
    return phi < 1 ? std::pow(q * (phi - 1 / p), 1 / q) : phi;
  }
  if (params.reciprocal()) {
    return std::pow(std::pow(phi, q) - 1, 1 / q);
  }
  // phi = tau(w) at w = 1 - s^p, and r = rho(s) = (s^p)^{(p-1)/p} w^{alpha-1}.
  const TauRoot root = tau_inverse_root(params, phi);
  return std::pow(root.complement, (p - 1) / p) * std::pow(root.w, params.alpha() - 1);
}

double sigma_hat_general(const DoglegParams& params, double phi) {
  const double floor = phi_floor(params);
  if (!(phi >= floor)) {
    throw DomainError("sigma_hat: phi = " + std::to_string(phi) +
                      " below the admissible range (" + std::to_string(floor) + ")");
  }
  const double p = params.p();
  if (params.saturating()) {
    return phi < 1 ? std::pow((p * phi - 1) / (p - 1), 1 / p) : 1.0;
  }
  return std::pow(tau_inverse_root(params, phi).complement, 1 / p);
}

double sigma_hat(const DoglegParams& params, double phi) {
  if (params.reciprocal()) {
    if (!(phi >= 1)) {
      throw DomainError("sigma_hat: phi = " + std::to_string(phi) +
                        " below the admissible range (1)");
    }
    return std::pow(1 - std::pow(phi, -params.q()), 1 / params.p());
  }
  return sigma_hat_general(params, phi);
}

double drift_contribution(const PotentialContext& ctx, const CotangentPoint& pt) {
  ctx.sys->check_point(pt);
  return pt.psi.dot(ctx.sys->drift(pt.z));
}

double chi(const PotentialContext& ctx, const CotangentPoint& pt) {
  const ControlGeometry g = control_geometry(*ctx.sys, pt);
  const double mu = ctx.sys->mu(pt.z);
  return drift_contribution(ctx, pt) + mu * chi_hat(ctx.params, g.ell / mu);
}

double phi_value(const PotentialContext& ctx, const Vector& z, double h) {
  return (ctx.sys->unmoderated_cost(z) + h) / ctx.sys->mu(z);
}

double hamiltonian(const PotentialContext& ctx, const CotangentPoint& pt) {
  return chi(ctx, pt) - ctx.sys->unmoderated_cost(pt.z);
}

double moderation_incentive(const PotentialContext& ctx, const Vector& z, const Vector& u) {
  double q = quadratic_form_value(*ctx.sys, z, u);
  if (q > 1 && q <= 1 + 1e-12) q = 1;
  return incentive_value(ctx.params, ctx.sys->mu(z), q);
}

double control_hamiltonian(const PotentialContext& ctx, const CotangentPoint& pt,
                           const Vector& u) {
  const Vector x = vector_field(*ctx.sys, pt.z, u);
  return pt.psi.dot(x) - ctx.sys->unmoderated_cost(pt.z) + moderation_incentive(ctx, pt.z, u);
}

}  // namespace modpot
