#include "modpot/projectile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

namespace modpot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_half_two(const DoglegParams& params) {
  return params.reciprocal() && params.p() == 2;
}

bool is_one_two(const DoglegParams& params) {
  return params.saturating() && params.p() == 2;
}

// g(phi) = chi_hat^{-1}(phi)^2, so n^2 = mu_ratio^2 g(phi).
double chi_inv_sq(const DoglegParams& params, double phi) {
  const double r = chi_hat_inverse(params, phi);
  return r * r;
}

// g(phi0 + delta) - g(phi0) without cancellation for small delta.
double chi_inv_sq_gap(const DoglegParams& params, double phi0, double delta) {
  if (is_half_two(params)) return delta * (2 * phi0 + delta);
  const double phi1 = phi0 + delta;
  if (is_one_two(params)) {
    if (phi0 >= 1 && phi1 >= 1) return delta * (2 * phi0 + delta);
    if (phi0 < 1 && phi1 < 1) return 2 * delta;
  }
  const double floor = phi_floor(params);
  if (std::abs(delta) <= 1e-3 * (phi0 - floor)) {
    // dg/dphi = 2 r / sigma(r) at r = chi_hat^{-1}(phi); Simpson on the slope.
    auto slope = [&](double phi) {
      const double r = chi_hat_inverse(params, phi);
      return 2 * r / sigma(params, r);
    };
    return delta / 6 * (slope(phi0) + 4 * slope(phi0 + delta / 2) + slope(phi1));
  }
  return chi_inv_sq(params, phi1) - chi_inv_sq(params, phi0);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

// Unmoderated path integrals shared by the alpha = 1/2 and saturated
// alpha = 1 cases: y_tilde and t, both functions of phi only.
ClosedForm unmoderated_integrals(const ProjectileScenario& scn, double x, double x0,
                                 double abs_tol) {
  require(x >= scn.x_f * (1 - 1e-12) && x <= x0, "path integrals: x must lie in [x_f, x0]");
  const double phi0 = scn.phi(x0);
  auto ratio_gap = [&](double xi, double d) {
    const double gap = scn.phi_gap(xi, x0, d);
    if (!(gap > 0)) {
      throw InfeasibleError("phi(x) does not exceed phi(x0) at x = " + std::to_string(xi));
    }
    return gap * (2 * phi0 + gap);  // phi^2 - phi0^2
  };
  const auto y = numerics::integrate_singular_offset(
      [&](double xi, double d) { return phi0 / std::sqrt(ratio_gap(xi, d)); }, x, x0,
      numerics::SingularEnd::Upper, abs_tol);
  const auto t = numerics::integrate_singular_offset(
      [&](double xi, double d) {
        const double phi = phi0 + scn.phi_gap(xi, x0, d);
        return phi / (scn.radius_at(xi) * std::sqrt(ratio_gap(xi, d)));
      },
      x, x0, numerics::SingularEnd::Upper, abs_tol);
  return {y.value, t.value};
}

}  // namespace

const char* to_string(RadiusProfile r) {
  return r == RadiusProfile::Reciprocal ? "reciprocal" : "unit";
}

const char* to_string(CostVariant v) {
  switch (v) {
    case CostVariant::SectionFive:
      return "default";
    case CostVariant::SectionTwoMi:
      return "mi";
    case CostVariant::SectionTwoKe:
      return "ke";
  }
  return "?";
}

void ProjectileScenario::validate() const {
  auto fail = [this](const std::string& msg) {
    throw ConfigError("scenario '" + id + "': " + msg);
  };
  if (!(c > 0) || !std::isfinite(c)) fail("c must be positive");
  if (!(mu_ratio > 0) || !std::isfinite(mu_ratio)) fail("mu_ratio must be positive");
  if (!(x_f > 0) || !std::isfinite(x_f)) fail("x_f must be positive");
  if (!(y_f > 0) || !std::isfinite(y_f)) fail("y_f must be positive");
  if (!std::isfinite(h)) fail("h must be finite");
  if (!(step > 0) || !std::isfinite(step)) fail("step must be positive");
  if (variant != CostVariant::SectionFive) {
    if (!is_one_two(params)) fail("mi/ke variants require alpha = 1, p = 2");
    if (radius != RadiusProfile::Unit) fail("mi/ke variants require the unit radius profile");
    if (x_f * x_f < c / 2) fail("mi/ke variants require x_f^2 >= c/2");
    if (mu_ratio < mu_min() * (1 - 1e-12) || mu_ratio > 2 * (1 + 1e-12)) {
      fail("mi/ke variants require mu_min = " + std::to_string(mu_min()) + " <= mu <= 2");
    }
  }
  if (x0_lo && !(*x0_lo > x_f)) fail("x0_lo must exceed x_f");
  if (x0_lo && x0_hi && !(*x0_hi > *x0_lo)) fail("x0_hi must exceed x0_lo");
  if (x0_hi && !x0_lo) fail("x0_hi given without x0_lo");
}

double ProjectileScenario::radius_at(double x) const {
  return radius == RadiusProfile::Reciprocal ? 1 / x : 1.0;
}

double ProjectileScenario::level() const {
  return variant == CostVariant::SectionTwoKe ? h + mu_ratio / 2 - 1 : h;
}

double ProjectileScenario::phi_gap(double x, double x0, double d) const {
  const double lv = level();
  if (radius == RadiusProfile::Unit) {
    return c / 2 * d * (x0 + x) / (x * x * x0 * x0) / mu_ratio;
  }
  // phi = (c/(2x) + (1 + h) x) / mu_ratio.
  return d * (c / (2 * x * x0) - (1 + lv)) / mu_ratio;
}

// The model lives on x > 0; the cost blows up at the wall.
static double wall_x(const Vector& z) {
  if (!(z(0) > 0)) throw DomainError("state left x > 0 (x = " + std::to_string(z(0)) + ")");
  return z(0);
}

std::shared_ptr<const AffineControlSystem> make_system(const ProjectileScenario& scn) {
  scn.validate();
  AffineControlSystem::Data d;
  d.state_dim = 2;
  d.control_dim = 2;
  d.control_fields = [](const Vector&) -> Matrix { return Matrix::Identity(2, 2); };
  d.control_fields_partial = [](const Vector&, int) -> Matrix { return Matrix::Zero(2, 2); };
  d.drift_jacobian = [](const Vector&) -> Matrix { return Matrix::Zero(2, 2); };
  const double c = scn.c, m = scn.mu_ratio;
  if (scn.radius == RadiusProfile::Reciprocal) {
    // Q(u) = x^2 |u|^2.
    d.form = [](const Vector& z) -> Matrix { return z(0) * z(0) * Matrix::Identity(2, 2); };
    d.form_partial = [](const Vector& z, int i) -> Matrix {
      return (i == 0 ? 2 * z(0) : 0.0) * Matrix::Identity(2, 2);
    };
    d.mu = [m](const Vector& z) { return m / wall_x(z); };
    d.mu_gradient = [m](const Vector& z) -> Vector {
      return Vector{{-m / (z(0) * z(0)), 0.0}};
    };
  } else {
    d.form = [](const Vector&) -> Matrix { return Matrix::Identity(2, 2); };
    d.form_partial = [](const Vector&, int) -> Matrix { return Matrix::Zero(2, 2); };
    d.mu = [m](const Vector&) { return m; };
    d.mu_gradient = [](const Vector&) -> Vector { return Vector::Zero(2); };
  }
  d.unmoderated_cost = [c](const Vector& z) {
    const double x = wall_x(z);
    return c / (2 * x * x) + 1;
  };
  d.cost_gradient = [c](const Vector& z) -> Vector {
    return Vector{{-c / (z(0) * z(0) * z(0)), 0.0}};
  };
  return std::make_shared<const AffineControlSystem>(std::move(d));
}

PotentialContext make_context(const ProjectileScenario& scn) {
  return PotentialContext{make_system(scn), scn.params};
}

NW n_w(const ProjectileScenario& scn, double x, double x0) {
  auto n_at = [&](double xi) {
    const double phi = scn.phi(xi);
    if (!(phi >= phi_floor(scn.params))) {
      throw InfeasibleError("phi(" + std::to_string(xi) + ") = " + std::to_string(phi) +
                            " is below the range of chi_hat");
    }
    return scn.mu_at(xi) * chi_hat_inverse(scn.params, phi) / scn.radius_at(xi);
  };
  const double n = n_at(x);
  const double n0 = n_at(x0);
  return {n, (n0 / n) * (n0 / n)};
}

void check_feasible(const ProjectileScenario& scn, double x0, int samples) {
  scn.validate();
  if (!(x0 > scn.x_f)) throw InfeasibleError("launch point must lie beyond x_f");
  const double floor = phi_floor(scn.params);
  const double phi0 = scn.phi(x0);
  if (!(phi0 > floor)) {
    throw InfeasibleError("phi(x0) = " + std::to_string(phi0) +
                          " is not inside the range of chi_hat (> " + std::to_string(floor) +
                          ")");
  }
  const bool cost_bound = scn.variant == CostVariant::SectionFive && !scn.params.saturating();
  for (int i = 0; i < samples; ++i) {
    const double x = scn.x_f + (x0 - scn.x_f) * i / (samples - 1);
    if (cost_bound && !(scn.mu_at(x) < scn.cost_at(x))) {
      throw InfeasibleError("mu(x) >= C^(x) at x = " + std::to_string(x));
    }
    if (i + 1 < samples && !(scn.phi_gap(x, x0, x0 - x) > 0)) {
      throw InfeasibleError("n has no strict minimum at x0 = " + std::to_string(x0) +
                            " (fails at x = " + std::to_string(x) + ")");
    }
  }
}

bool is_feasible(const ProjectileScenario& scn, double x0, int samples) {
  try {
    check_feasible(scn, x0, samples);
    return true;
  } catch (const InfeasibleError&) {
    return false;
  }
}

double x0_upper_bound(const ProjectileScenario& scn) {
  const double floor = phi_floor(scn.params);
  const double lv = scn.level();
  double ub = kInf;
  if (scn.radius == RadiusProfile::Reciprocal && 1 + lv > 0) {
    ub = std::sqrt(scn.c / (2 * (1 + lv)));
  }
  // phi is decreasing below ub; cut where it meets the range floor.
  const double phi_end =
      std::isinf(ub) ? (1 + lv) / scn.mu_ratio : scn.phi(ub);
  if (phi_end > floor) return ub;
  if (!(scn.phi(scn.x_f) > floor)) return scn.x_f;
  double hi = std::isinf(ub) ? 2 * scn.x_f : ub;
  while (std::isinf(ub) && scn.phi(hi) > floor) hi *= 2;
  return numerics::find_root([&](double x) { return scn.phi(x) - floor; }, scn.x_f, hi, 1e-14);
}

double y_quadrature(const ProjectileScenario& scn, double x, double x0, double abs_tol) {
  require(x >= scn.x_f * (1 - 1e-12) && x <= x0, "y_quadrature: x must lie in [x_f, x0]");
  const DoglegParams& params = scn.params;
  const double phi0 = scn.phi(x0);
  const double g0 = chi_inv_sq(params, phi0);
  const auto res = numerics::integrate_singular_offset(
      [&](double xi, double d) {
        const double dg = chi_inv_sq_gap(params, phi0, scn.phi_gap(xi, x0, d));
        if (!(dg > 0)) {
          throw InfeasibleError("n has no strict minimum at x0 (x = " + std::to_string(xi) + ")");
        }
        return std::sqrt(g0 / dg);
      },
      x, x0, numerics::SingularEnd::Upper, abs_tol);
  return res.value;
}

double t_quadrature(const ProjectileScenario& scn, double x, double x0, double abs_tol) {
  require(x >= scn.x_f * (1 - 1e-12) && x <= x0, "t_quadrature: x must lie in [x_f, x0]");
  const DoglegParams& params = scn.params;
  const double phi0 = scn.phi(x0);
  const double g0 = chi_inv_sq(params, phi0);
  const auto res = numerics::integrate_singular_offset(
      [&](double xi, double d) {
        const double gap = scn.phi_gap(xi, x0, d);
        const double dg = chi_inv_sq_gap(params, phi0, gap);
        if (!(dg > 0)) {
          throw InfeasibleError("n has no strict minimum at x0 (x = " + std::to_string(xi) + ")");
        }
        const double s = sigma_hat(params, phi0 + gap);
        return std::sqrt((g0 + dg) / dg) / (scn.radius_at(xi) * s);
      },
      x, x0, numerics::SingularEnd::Upper, abs_tol);
  return res.value;
}

HalfTwoForms corollary3_forms(const ProjectileScenario& scn, double x, double x0, double abs_tol) {
  require(is_half_two(scn.params), "corollary3_forms: requires alpha = 1/2, p = 2");
  const double phi0 = scn.phi(x0);
  if (!(phi0 >= 1)) {
    throw InfeasibleError("corollary3_forms: phi(x0) = " + std::to_string(phi0) +
                          " < 1 leaves v imaginary");
  }
  HalfTwoForms out;
  out.v = std::sqrt(1 - 1 / (phi0 * phi0));
  if (x >= x0) {
    out.y_tilde = out.y = out.t = 0;
    return out;
  }
  const ClosedForm f = unmoderated_integrals(scn, x, x0, abs_tol);
  out.y_tilde = f.y_tilde;
  out.y = out.v * f.y_tilde;
  out.t = f.t;
  return out;
}

double corollary3_vertical_velocity(const ProjectileScenario& scn, double x, double x0) {
  require(is_half_two(scn.params), "corollary3: requires alpha = 1/2, p = 2");
  const double phi0 = scn.phi(x0);
  const double phi = scn.phi(x);
  const double v = std::sqrt(1 - 1 / (phi0 * phi0));
  const double dy = v / std::sqrt((phi / phi0) * (phi / phi0) - 1);
  const double dt = 1 / (scn.radius_at(x) * std::sqrt(1 - (phi0 / phi) * (phi0 / phi)));
  return dy / dt;
}

ClosedForm closed_form_log(const ProjectileScenario& scn, double x, double x0) {
  require(scn.radius == RadiusProfile::Reciprocal, "closed_form_log: requires r(x) = 1/x");
  require(is_half_two(scn.params), "closed_form_log: requires alpha = 1/2, p = 2");
  require(scn.level() == 0, "closed_form_log: requires h = 0");
  require(x > 0 && x <= x0, "closed_form_log: requires 0 < x <= x0");
  const double a = scn.c / (2 * x0);
  auto eta = [&](double xi) {
    const double rad = (a - xi) * (a + xi);
    if (!(rad > 0)) {
      throw DomainError("closed_form_log: (c/(2 x0))^2 - x^2 must be positive");
    }
    return std::sqrt(rad);
  };
  const double k = a + x0;
  const double root = std::sqrt((x0 - x) * (x0 + x));
  const double ex = eta(x);
  const double y_tilde = k * std::log((ex + root) / eta(x0));
  return {y_tilde, (k * y_tilde - ex * root) / 2};
}

ClosedForm closed_form_elliptic(const ProjectileScenario& scn, double x, double x0,
                                EllipticOptions opts) {
  require(scn.radius == RadiusProfile::Unit, "closed_form_elliptic: requires r = 1");
  require(is_half_two(scn.params), "closed_form_elliptic: requires alpha = 1/2, p = 2");
  require(scn.level() == 0, "closed_form_elliptic: requires h = 0");
  require(x > 0 && x <= x0, "closed_form_elliptic: requires 0 < x <= x0");
  const double k = -(1 + 4 * x0 * x0 / scn.c);
  auto gammas = [&](double u) {
    const double angle = std::asin(std::min(u, 1.0));
    const double f = numerics::elliptic_F(angle, k, opts.convention);
    const double e = numerics::elliptic_E(angle, k, opts.convention);
    return std::pair{f + e, f - e};
  };
  const auto [plus_x, minus_x] = gammas(x / x0);
  const auto [plus_1, minus_1] = gammas(1);
  const double g_plus = x0 * (plus_x - plus_1);
  const double g_minus = x0 * (minus_x - minus_1);
  const double y_tilde = g_minus / (1 + 1 / scn.cost_at(x0));
  const double sign = opts.time_form == EllipticTimeForm::Corrected ? -1 : 1;
  return {y_tilde, (sign * g_plus + g_minus / k) / 2};
}

Vector EllipseSolution::position(double t) const {
  return Vector{{std::sqrt(std::max(x0 * x0 - zeta * t * t, 0.0)), sigma_hat * t}};
}

double EllipseSolution::time_at(double x) const {
  return std::sqrt((x0 - x) * (x0 + x) / zeta);
}

double EllipseSolution::identity_residual(double t) const {
  const Vector z = position(t);
  return z(0) * z(0) / (x0 * x0) + z(1) * z(1) * zeta / (sigma_hat * sigma_hat * x0 * x0) - 1;
}

PhiRegion phi_region(const ProjectileScenario& scn, double x0) {
  constexpr int kSamples = 1001;
  bool below = true, above = true;
  for (int i = 0; i < kSamples; ++i) {
    const double phi = scn.phi(scn.x_f + (x0 - scn.x_f) * i / (kSamples - 1));
    below = below && phi <= 1 + 1e-12;
    above = above && phi >= 1 - 1e-12;
  }
  if (below) return PhiRegion::Unsaturated;
  if (above) return PhiRegion::Saturated;
  throw DomainError("phi crosses 1 inside [x_f, x0]; mixed-region paths are not supported");
}

EllipseSolution section52_solution(const ProjectileScenario& scn, double x0) {
  require(is_one_two(scn.params), "section52_solution: requires alpha = 1, p = 2");
  require(scn.radius == RadiusProfile::Unit, "section52_solution: requires r = 1");
  if (phi_region(scn, x0) != PhiRegion::Unsaturated) {
    throw DomainError("section52_solution: phi >= 1 on [x_f, x0]; the path is not an ellipse");
  }
  const double phi0 = scn.phi(x0);
  if (!(phi0 > 0.5)) {
    throw InfeasibleError("section52_solution: phi(x0) must exceed 1/2");
  }
  return {x0, scn.c / (scn.mu_ratio * x0 * x0), std::sqrt(2 * phi0 - 1)};
}

ClosedForm ellipse_path(const ProjectileScenario& scn, double x, double x0) {
  require(is_one_two(scn.params), "ellipse_path: requires alpha = 1, p = 2");
  require(scn.radius == RadiusProfile::Unit, "ellipse_path: requires r = 1");
  if (phi_region(scn, x0) == PhiRegion::Unsaturated) {
    const EllipseSolution e = section52_solution(scn, x0);
    const double t = e.time_at(x);
    return {e.sigma_hat * t, t};
  }
  if (x >= x0) return {0, 0};
  return unmoderated_integrals(scn, x, x0, 1e-11);
}

double section2_x0(double c, double mu, double x_f, double y_f) {
  if (!(c > 0 && x_f > 0 && y_f > 0)) throw DomainError("section2_x0: c, x_f, y_f must be positive");
  if (x_f * x_f < c / 2) throw DomainError("section2_x0: requires x_f^2 >= c/2");
  const double mu_min = 1 + c / (2 * x_f * x_f);
  if (!(mu >= mu_min * (1 - 1e-12))) {
    throw DomainError("section2_x0: mu below mu_min = " + std::to_string(mu_min));
  }
  if (!(mu < 2)) throw DomainError("section2_x0: requires mu < 2");
  const double a = x_f * x_f + y_f * y_f;
  const double d = c / (2 - mu);
  const double b = x_f * x_f - d;
  return std::sqrt(b / 2 + std::sqrt(b * b / 4 + a * d));
}

std::pair<double, double> launch_bracket(const ProjectileScenario& scn) {
  scn.validate();
  const double ub = x0_upper_bound(scn);
  if (!(ub > scn.x_f)) throw InfeasibleError("no admissible launch point beyond x_f");
  auto height = [&](double x0) { return y_quadrature(scn, scn.x_f, x0, 1e-9); };

  constexpr int kGrid = 200;
  double span = std::isinf(ub) ? 2 * std::max(scn.x_f, scn.y_f) : (ub - scn.x_f) * (1 - 1e-9);
  for (int attempt = 0; attempt < 12; ++attempt, span *= 2) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int i = 1; i <= kGrid; ++i) {
      const double x0 = scn.x_f + span * i / kGrid;
      if (!is_feasible(scn, x0, 201)) {
        prev = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double y = height(x0);
      if (y >= scn.y_f) {
        double lo = prev;
        if (std::isnan(lo)) {
          // Walk towards x_f until the height drops below target.
          lo = x0;
          for (int k = 0; k < 60 && !(height(lo) < scn.y_f); ++k) lo = scn.x_f + (lo - scn.x_f) / 2;
          if (!(height(lo) < scn.y_f)) break;
        }
        const double root = numerics::find_root(
            [&](double s) { return height(s) - scn.y_f; }, lo, x0, 1e-12);
        const double pad = 1e-3 * (root - scn.x_f);
        return {std::max(lo, root - pad), std::min(x0, root + pad)};
      }
      prev = x0;
    }
    if (!std::isinf(ub)) break;
  }
  throw InfeasibleError("no launch point reaches y_f = " + std::to_string(scn.y_f) +
                        " for scenario '" + scn.id + "'");
}

SolverSettings default_solver_settings(const ProjectileScenario& scn) {
  SolverSettings s;
  s.step = scn.step;
  s.t_max = 500;
  return s;
}

ShootingProblem make_shooting_problem(const ProjectileScenario& scn) {
  scn.validate();
  ShootingProblem prob;
  prob.ctx = make_context(scn);
  prob.launch_state = [](double x0) { return Vector{{x0, 0.0}}; };
  prob.launch_direction = [](double) { return Vector{{0.0, 1.0}}; };
  const double x_f = scn.x_f, y_f = scn.y_f;
  prob.arrival = [x_f](const Vector& z) { return z(0) - x_f; };
  prob.miss = [y_f](const Vector& z) { return z(1) - y_f; };
  if (scn.x0_lo && scn.x0_hi) {
    prob.param_lo = *scn.x0_lo;
    prob.param_hi = *scn.x0_hi;
  } else {
    std::tie(prob.param_lo, prob.param_hi) = launch_bracket(scn);
  }
  prob.level = scn.level();
  prob.id = scn.id;
  return prob;
}

double ellipse_fit_deviation(const Trajectory& traj) {
  // Linear least squares for x^2 + a x + b y^2 + d = 0, i.e. an axis-aligned
  // ellipse centred at (-a/2, 0).
  Eigen::MatrixXd design(traj.samples.size(), 3);
  Eigen::VectorXd rhs(traj.samples.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double x = traj.samples[i].z(0), y = traj.samples[i].z(1);
    design.row(i) << x, y * y, 1;
    rhs(i) = -x * x;
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  const double xc = -coef(0) / 2;
  const double a2 = xc * xc - coef(2);
  const double b2 = a2 / coef(1);
  if (!(a2 > 0 && b2 > 0)) throw DomainError("ellipse_fit_deviation: fitted conic is not an ellipse");
  double worst = 0;
  for (const auto& s : traj.samples) {
    const double dx = s.z(0) - xc, dy = s.z(1);
    const double scale = std::sqrt(dx * dx / a2 + dy * dy / b2);
    worst = std::max(worst, std::abs(1 - 1 / scale) * std::hypot(dx, dy));
  }
  return worst;
}

bool saturation_flag(const ProjectileScenario& scn) {
  return scn.params.saturating() && std::abs(scn.phi(scn.x_f) - 1) <= 1e-9;
}

}  // namespace modpot
