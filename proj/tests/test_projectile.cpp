#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modpot/projectile.hpp"
#include "modpot/verification.hpp"
#include "oracles.hpp"

using namespace modpot;

namespace {

ProjectileScenario half_two(RadiusProfile radius, double c, double m, double x_f) {
  ProjectileScenario s;
  s.c = c;
  s.mu_ratio = m;
  s.x_f = x_f;
  s.y_f = 1;
  s.radius = radius;
  s.params = DoglegParams(0.5, 2);
  return s;
}

ProjectileScenario section_two(double c, double mu, double x_f, double y_f, CostVariant v) {
  ProjectileScenario s;
  s.c = c;
  s.mu_ratio = mu;
  s.x_f = x_f;
  s.y_f = y_f;
  s.params = DoglegParams(1, 2);
  s.variant = v;
  return s;
}

}  // namespace

TEST_CASE("scenario validation") {
  ProjectileScenario s;
  CHECK_NOTHROW(s.validate());
  auto bad = s;
  bad.c = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.x_f = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.variant = CostVariant::SectionTwoMi;  // needs alpha = 1
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  auto mi = section_two(0.5, 1.1, 1, 2, CostVariant::SectionTwoMi);  // below mu_min = 1.25
  CHECK_THROWS_AS(mi.validate(), ConfigError);
  mi.mu_ratio = 1.5;
  CHECK_NOTHROW(mi.validate());
}

TEST_CASE("quadrature matches the hand-derived integrals") {
  for (auto radius : {RadiusProfile::Unit, RadiusProfile::Reciprocal}) {
    const bool recip = radius == RadiusProfile::Reciprocal;
    const auto scn = half_two(radius, 2, 0.8, recip ? 0.1 : 0.5);
    const oracle::HalfTwoProjectile ref{scn.c, scn.mu_ratio, recip};
    for (double x0 : {recip ? 0.5 : 0.8, recip ? 0.8 : 1.3}) {
      const auto [y, t] = ref.path(scn.x_f, x0);
      CHECK(y_quadrature(scn, scn.x_f, x0) == doctest::Approx(y).epsilon(1e-8));
      CHECK(t_quadrature(scn, scn.x_f, x0) == doctest::Approx(t).epsilon(1e-8));
    }
  }
}

TEST_CASE("closed forms match the quadrature") {
  const auto lg = half_two(RadiusProfile::Reciprocal, 2, 1, 0.1);
  for (double x0 : {0.3, 0.6, 0.9}) {
    for (double x : {0.1, 0.2, 0.99 * x0}) {
      const auto c3 = corollary3_forms(lg, x, x0);
      const auto cf = closed_form_log(lg, x, x0);
      CHECK(cf.y_tilde * c3.v == doctest::Approx(y_quadrature(lg, x, x0)).epsilon(1e-10));
      CHECK(cf.t == doctest::Approx(t_quadrature(lg, x, x0)).epsilon(1e-10));
      CHECK(c3.y == doctest::Approx(y_quadrature(lg, x, x0)).epsilon(1e-10));
    }
  }
  const auto el = half_two(RadiusProfile::Unit, 2, 1, 0.5);
  for (double x0 : {0.6, 0.9, 1.5}) {
    for (double x : {0.5, 0.55, 0.99 * x0}) {
      const auto c3 = corollary3_forms(el, x, x0);
      const auto cf = closed_form_elliptic(el, x, x0);
      CHECK(cf.y_tilde * c3.v == doctest::Approx(y_quadrature(el, x, x0)).epsilon(1e-10));
      CHECK(cf.t == doctest::Approx(t_quadrature(el, x, x0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("elliptic time form and convention are pinned by the quadrature") {
  const auto el = half_two(RadiusProfile::Unit, 2, 1, 0.5);
  EllipticOptions printed;
  printed.time_form = EllipticTimeForm::AsPrinted;
  const double t_printed = closed_form_elliptic(el, 0.5, 0.9, printed).t;
  CHECK(t_printed < 0);
  CHECK(t_printed != doctest::Approx(t_quadrature(el, 0.5, 0.9)).epsilon(1e-3));
  EllipticOptions modulus;
  modulus.convention = numerics::EllipticConvention::Modulus;
  CHECK_THROWS_AS(closed_form_elliptic(el, 0.55, 0.9, modulus), DomainError);
  CHECK(kPinnedEllipticConvention == numerics::EllipticConvention::Parameter);
}

TEST_CASE("vertical velocity identity") {
  for (auto radius : {RadiusProfile::Unit, RadiusProfile::Reciprocal}) {
    const auto scn = half_two(radius, 2, 1, 0.3);
    const double x0 = 0.9, x = 0.5;
    const double v = corollary3_forms(scn, x, x0).v;
    const double expect = v * scn.radius_at(x) * scn.phi(x0) / scn.phi(x);
    CHECK(corollary3_vertical_velocity(scn, x, x0) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("launch point formula for the section-two instance") {
  const double x0 = section2_x0(0.5, 1.5, 1, 2);
  CHECK(x0 == doctest::Approx(std::pow(5.0, 0.25)).epsilon(1e-15));
  CHECK(x0 == doctest::Approx(1.495349).epsilon(1e-6));
  CHECK_THROWS_AS(section2_x0(0.5, 2.0, 1, 2), DomainError);
  CHECK_THROWS_AS(section2_x0(0.5, 1.1, 1, 2), DomainError);
  CHECK_THROWS_AS(section2_x0(3.0, 1.5, 1, 2), DomainError);
}

TEST_CASE("ellipse solution") {
  const auto scn = section_two(0.5, 1.5, 1, 2, CostVariant::SectionTwoMi);
  const double x0 = section2_x0(0.5, 1.5, 1, 2);
  const auto e = section52_solution(scn, x0);
  const double t_f = e.time_at(1);
  CHECK(e.position(t_f)(0) == doctest::Approx(1).epsilon(1e-14));
  CHECK(e.position(t_f)(1) == doctest::Approx(2).epsilon(1e-13));
  for (int i = 0; i <= 50; ++i) CHECK(std::abs(e.identity_residual(t_f * i / 50)) <= 1e-12);
  CHECK(t_f == doctest::Approx(t_quadrature(scn, 1, x0)).epsilon(1e-9));
  CHECK(2 == doctest::Approx(y_quadrature(scn, 1, x0)).epsilon(1e-9));
}

TEST_CASE("x0 grows with mu along the section-two family") {
  double prev = 0;
  for (double mu = 1.25; mu < 2; mu += 0.07) {
    const double x0 = section2_x0(0.5, mu, 1, 2);
    CHECK(x0 > prev);
    prev = x0;
  }
}

TEST_CASE("phi regions") {
  const auto mi = section_two(0.5, 1.5, 1, 2, CostVariant::SectionTwoMi);
  CHECK(phi_region(mi, section2_x0(0.5, 1.5, 1, 2)) == PhiRegion::Unsaturated);
  auto sat = half_two(RadiusProfile::Unit, 2, 0.8, 0.5);
  sat.params = DoglegParams(1, 2);
  CHECK(phi_region(sat, 1.2) == PhiRegion::Saturated);
  auto mixed = sat;
  mixed.mu_ratio = 3;
  CHECK_THROWS_AS(phi_region(mixed, 2.0), DomainError);
  CHECK_THROWS_AS(section52_solution(sat, 1.2), DomainError);
}

TEST_CASE("feasibility screening") {
  const auto scn = half_two(RadiusProfile::Unit, 2, 1, 0.5);
  CHECK(is_feasible(scn, 0.9));
  CHECK_FALSE(is_feasible(scn, 0.5));
  auto heavy = scn;
  heavy.mu_ratio = 5;  // mu above C^ everywhere near x0 = 2
  CHECK_THROWS_AS(check_feasible(heavy, 2.0), InfeasibleError);
  CHECK((std::isinf(x0_upper_bound(scn)) || x0_upper_bound(scn) > 0.5));
}

TEST_CASE("launch bracket encloses the quadrature root") {
  const auto scn = half_two(RadiusProfile::Reciprocal, 2, 1, 0.1);
  const auto [lo, hi] = launch_bracket(scn);
  CHECK(lo < hi);
  const double a = y_quadrature(scn, scn.x_f, lo) - 1;
  const double b = y_quadrature(scn, scn.x_f, hi) - 1;
  CHECK(a * b < 0);
}

TEST_CASE("unreachable figure members cannot reach the target height") {
  for (const auto& fc : unreachable_figure_cases()) {
    const auto& scn = fc.scn;
    const double ub = std::min(x0_upper_bound(scn), 20.0);
    double best = 0;
    for (int i = 1; i < 400; ++i) {
      const double x0 = scn.x_f + (ub - scn.x_f) * i / 400.0;
      if (!is_feasible(scn, x0, 201)) continue;
      best = std::max(best, y_quadrature(scn, scn.x_f, x0, 1e-9));
    }
    INFO(scn.id);
    CHECK(best < 0.9 * scn.y_f);
    CHECK_THROWS_AS(launch_bracket(scn), InfeasibleError);
  }
}

TEST_CASE("kinetic-energy variant follows circles") {
  auto ke = section_two(0.5, 1.5, 1, 2, CostVariant::SectionTwoKe);
  for (double mu : {1.25, 1.5, 1.9}) {
    ke.mu_ratio = mu;
    const auto sol = solve_free_time(make_shooting_problem(ke), default_solver_settings(ke));
    CHECK(sol.param == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
    CHECK(radial_spread(sol.trajectory, std::sqrt(5.0)) < 1e-8);
  }
}

TEST_CASE("ellipse fit") {
  const auto mi = section_two(0.5, 1.5, 1, 2, CostVariant::SectionTwoMi);
  const auto exact = solve_free_time(make_shooting_problem(mi), default_solver_settings(mi));
  CHECK(ellipse_fit_deviation(exact.trajectory) < 1e-9);
  const auto near = half_two(RadiusProfile::Unit, 2, 1, 0.5);
  const auto sol = solve_free_time(make_shooting_problem(near), default_solver_settings(near));
  const double d = ellipse_fit_deviation(sol.trajectory);
  CHECK(d > 1e-5);
  CHECK(d < 0.02);
}

TEST_CASE("saturation flag marks mu at its minimum") {
  auto mi = section_two(0.5, 1.25, 1, 2, CostVariant::SectionTwoMi);
  CHECK(saturation_flag(mi));
  mi.mu_ratio = 1.5;
  CHECK_FALSE(saturation_flag(mi));
}
