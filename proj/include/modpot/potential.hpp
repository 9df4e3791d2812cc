#pragma once

// Moderation potentials of the dogleg family and the synthesis Hamiltonian
//
//   chi(psi) = psi . f(z) + mu(z) chi_hat(ell(psi) / mu(z)),   H = chi - C^(z).
//
// chi_hat(r) is the maximum over s of r s + (1 - s^p)^alpha / (alpha p). For
// alpha < 1 it is evaluated as tau(1 - s^p) at s = rho^{-1}(r), with
//
//   tau(w) = w^{alpha-1} (1 + (1/(alpha p) - 1) w),
//
// which is strictly decreasing on (0, 1) with infimum 1/(alpha p).

#include <memory>

#include "modpot/dogleg.hpp"
#include "modpot/geometry.hpp"

namespace modpot {

struct PotentialContext {
  std::shared_ptr<const AffineControlSystem> sys;
  DoglegParams params{0.5, 2};
};

// tau(w) for 0 < alpha < 1 and w in (0, 1].
double tau(const DoglegParams& params, double w);

// Root of tau(w) = phi together with its complement 1 - w (= s^p), each to
// full relative precision. phi = 1/(alpha p) maps to w = 1.
struct TauRoot {
  double w;
  double complement;
};
TauRoot tau_inverse_root(const DoglegParams& params, double phi);
double tau_inverse(const DoglegParams& params, double phi);

// Reduced potential. Uses the alpha p = 1 norm form when it applies.
double chi_hat(const DoglegParams& params, double r);
// Reduced potential through rho inversion (alpha < 1) or the alpha = 1
// piecewise polynomial, never the alpha p = 1 shortcut.
double chi_hat_general(const DoglegParams& params, double r);
// chi_hat^{-1}(phi) for phi >= chi_hat(0).
double chi_hat_inverse(const DoglegParams& params, double phi);

// Smallest admissible phi for sigma_hat / chi_hat_inverse: chi_hat(0).
double phi_floor(const DoglegParams& params);

// Optimal scaling as a function of the conserved quantity phi.
double sigma_hat(const DoglegParams& params, double phi);
double sigma_hat_general(const DoglegParams& params, double phi);

// a0(psi) = psi . f(z).
double drift_contribution(const PotentialContext& ctx, const CotangentPoint& pt);

// chi(psi) = a0 + mu chi_hat(ell / mu).
double chi(const PotentialContext& ctx, const CotangentPoint& pt);

// phi(z; h) = (C^(z) + h) / mu(z).
double phi_value(const PotentialContext& ctx, const Vector& z, double h);

// Synthesis Hamiltonian H = chi - C^.
double hamiltonian(const PotentialContext& ctx, const CotangentPoint& pt);

// Incentive value at an arbitrary admissible control.
double moderation_incentive(const PotentialContext& ctx, const Vector& z, const Vector& u);

// Control-parametrized Hamiltonian  psi . X(z, u) - (C^(z) - C~(z, u)).
double control_hamiltonian(const PotentialContext& ctx, const CotangentPoint& pt,
                           const Vector& u);

}  // namespace modpot
