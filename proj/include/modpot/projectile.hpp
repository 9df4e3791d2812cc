#pragma once

// Vertical take-off interception benchmark.
//
// State (x, y), controlled velocity (x', y') = u, admissible region the disc
// of radius r(x), moderation strength mu(x) = mu_ratio * r(x) and unmoderated
// cost C^(x) = c / (2 x^2) + 1. The launch is at (x0, 0) with psi(0) vertical;
// the target is (x_f, y_f) with 0 < x_f < x0.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modpot/numerics.hpp"
#include "modpot/synthesis.hpp"

namespace modpot {

enum class RadiusProfile { Reciprocal, Unit };  // r(x) = 1/x, r(x) = 1
enum class CostVariant {
  SectionFive,   // C^ = c/(2x^2) + 1 at the configured level h
  SectionTwoMi,  // alpha = 1, p = 2, r = 1, mu_ratio = mu, level 0
  SectionTwoKe,  // as SectionTwoMi with the constant shifted: level h + mu/2 - 1
};

struct ProjectileScenario {
  std::string id = "scenario";
  double c = 2;
  double mu_ratio = 1;
  double x_f = 0.5;
  double y_f = 1;
  RadiusProfile radius = RadiusProfile::Unit;
  DoglegParams params{0.5, 2};
  double h = 0;
  CostVariant variant = CostVariant::SectionFive;
  std::optional<double> x0_lo;  // shooting bracket; searched when absent
  std::optional<double> x0_hi;
  double step = 1e-3;

  // Throws ConfigError on invalid fields.
  void validate() const;

  double radius_at(double x) const;
  double mu_at(double x) const { return mu_ratio * radius_at(x); }
  double cost_at(double x) const { return c / (2 * x * x) + 1; }
  // Hamiltonian level the solution lives on.
  double level() const;
  double phi(double x) const { return (cost_at(x) + level()) / mu_at(x); }
  // phi(x) - phi(x0) given d = x0 - x exactly.
  double phi_gap(double x, double x0, double d) const;
  // Smallest mu_ratio for which the cost variant is admissible (section two only).
  double mu_min() const { return 1 + c / (2 * x_f * x_f); }
};

std::shared_ptr<const AffineControlSystem> make_system(const ProjectileScenario& scn);
PotentialContext make_context(const ProjectileScenario& scn);

struct NW {
  double n;
  double w;  // (n(x0) / n(x))^2
};
NW n_w(const ProjectileScenario& scn, double x, double x0);

// Throws InfeasibleError unless phi(x0) lies strictly inside the range of
// chi_hat, n has a strict minimum at x0 on [x_f, x0] (sampled on `samples`
// points) and, for alpha < 1 in the default variant, mu < C^ on [x_f, x0].
void check_feasible(const ProjectileScenario& scn, double x0, int samples = 1001);
bool is_feasible(const ProjectileScenario& scn, double x0, int samples = 1001);

// Largest launch point for which phi stays decreasing and above the range
// floor; infinity when unbounded.
double x0_upper_bound(const ProjectileScenario& scn);

// Height and elapsed time at x in [x_f, x0) from the implicit quadrature
// solution.
double y_quadrature(const ProjectileScenario& scn, double x, double x0, double abs_tol = 1e-11);
double t_quadrature(const ProjectileScenario& scn, double x, double x0, double abs_tol = 1e-11);

// alpha = 1/2, p = 2 specialization.
struct HalfTwoForms {
  double v;        // sqrt(1 - phi(x0)^-2)
  double y_tilde;  // unmoderated path height
  double y;        // v * y_tilde
  double t;
};
HalfTwoForms corollary3_forms(const ProjectileScenario& scn, double x, double x0,
                            double abs_tol = 1e-11);
// Ratio of the two integrands, dy/dt at x; equals v r(x) phi(x0) / phi(x).
double corollary3_vertical_velocity(const ProjectileScenario& scn, double x, double x0);

struct ClosedForm {
  double y_tilde;
  double t;
};

// r = 1/x, h = 0.
ClosedForm closed_form_log(const ProjectileScenario& scn, double x, double x0);

enum class EllipticTimeForm {
  Corrected,  // 2t = -gamma_+ + gamma_- / k
  AsPrinted,  // 2t =  gamma_+ + gamma_- / k
};
struct EllipticOptions {
  numerics::EllipticConvention convention = numerics::EllipticConvention::Parameter;
  EllipticTimeForm time_form = EllipticTimeForm::Corrected;
};
// Convention selected by comparing against quadrature; see tests.
inline constexpr numerics::EllipticConvention kPinnedEllipticConvention =
    numerics::EllipticConvention::Parameter;

// r = 1, h = 0.
ClosedForm closed_form_elliptic(const ProjectileScenario& scn, double x, double x0,
                                EllipticOptions opts = {});

// alpha = 1, p = 2, r = 1 with 1/2 <= phi <= 1 on [x_f, x0]: the path is an
// arc of the ellipse x^2/x0^2 + y^2 zeta / (sigma^2 x0^2) = 1.
struct EllipseSolution {
  double x0;
  double zeta;       // c / (mu x0^2)
  double sigma_hat;  // sqrt(2 phi(x0) - 1)

  Vector position(double t) const;
  double time_at(double x) const;
  double identity_residual(double t) const;
};

enum class PhiRegion { Unsaturated, Saturated };  // phi <= 1, phi >= 1 on [x_f, x0]
// Throws DomainError when phi crosses 1 strictly inside [x_f, x0].
PhiRegion phi_region(const ProjectileScenario& scn, double x0);

EllipseSolution section52_solution(const ProjectileScenario& scn, double x0);

// Height and time at x for the alpha = 1, p = 2, r = 1 problem in either
// region: the ellipse when unsaturated, the unmoderated integrals otherwise.
ClosedForm ellipse_path(const ProjectileScenario& scn, double x, double x0);

// x0^2 = b/2 + sqrt(b^2/4 + a d), a = x_f^2 + y_f^2, d = c/(2 - mu),
// b = x_f^2 - d. Requires x_f^2 >= c/2 and mu_min <= mu < 2.
double section2_x0(double c, double mu, double x_f, double y_f);

// Launch bracket around the first x0 (scanning up from x_f) at which the
// quadrature height at x_f reaches y_f.
std::pair<double, double> launch_bracket(const ProjectileScenario& scn);

ShootingProblem make_shooting_problem(const ProjectileScenario& scn);
SolverSettings default_solver_settings(const ProjectileScenario& scn);

// Max over samples of the distance from the best-fit axis-aligned ellipse
// (x - x_c)^2/A^2 + y^2/B^2 = 1, measured along the ray through its centre.
// The centre stays on the x axis, matching the vertical launch.
double ellipse_fit_deviation(const Trajectory& traj);

// Whether phi(x_f) sits on the saturation boundary (mu at mu_min).
bool saturation_flag(const ProjectileScenario& scn);

const char* to_string(RadiusProfile r);
const char* to_string(CostVariant v);

}  // namespace modpot
