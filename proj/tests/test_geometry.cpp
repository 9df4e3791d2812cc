#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modpot/geometry.hpp"

using namespace modpot;

namespace {

// Two states, two controls, everything depending on z.
AffineControlSystem::Data skewed(bool analytic) {
  AffineControlSystem::Data d;
  d.state_dim = 2;
  d.control_dim = 2;
  d.drift = [](const Vector& z) { return Vector{{z(1), -std::sin(z(0))}}; };
  d.control_fields = [](const Vector& z) {
    return Matrix{{1 + 0.1 * z(0) * z(0), 0.2}, {0.3 * z(1), 1.0}};
  };
  d.form = [](const Vector& z) { return Matrix{{2 + std::cos(z(0)), 0.4}, {0.4, 1 + z(1) * z(1)}}; };
  d.mu = [](const Vector& z) { return 1 + 0.5 * z(0) * z(0); };
  d.unmoderated_cost = [](const Vector& z) { return 1 + z.squaredNorm(); };
  if (analytic) {
    d.drift_jacobian = [](const Vector& z) { return Matrix{{0, 1}, {-std::cos(z(0)), 0}}; };
    d.control_fields_partial = [](const Vector& z, int i) {
      return i == 0 ? Matrix{{0.2 * z(0), 0}, {0, 0}} : Matrix{{0, 0}, {0.3, 0}};
    };
    d.form_partial = [](const Vector& z, int i) {
      return i == 0 ? Matrix{{-std::sin(z(0)), 0}, {0, 0}} : Matrix{{0, 0}, {0, 2 * z(1)}};
    };
    d.mu_gradient = [](const Vector& z) { return Vector{{z(0), 0}}; };
    d.cost_gradient = [](const Vector& z) { return Vector(2 * z); };
  }
  return d;
}

}  // namespace

TEST_CASE("finite-difference fallbacks match analytic derivatives") {
  const AffineControlSystem a(skewed(true)), n(skewed(false));
  const Vector z{{0.7, -0.4}};
  CHECK((a.drift_jacobian(z) - n.drift_jacobian(z)).norm() < 1e-8);
  for (int i = 0; i < 2; ++i) {
    CHECK((a.control_fields_partial(z, i) - n.control_fields_partial(z, i)).norm() < 1e-8);
    CHECK((a.form_partial(z, i) - n.form_partial(z, i)).norm() < 1e-8);
  }
  CHECK((a.mu_gradient(z) - n.mu_gradient(z)).norm() < 1e-8);
  CHECK((a.cost_gradient(z) - n.cost_gradient(z)).norm() < 1e-8);
}

TEST_CASE("system data is checked") {
  auto d = skewed(false);
  d.state_dim = 0;
  CHECK_THROWS_AS(AffineControlSystem{d}, ConfigError);
  d = skewed(false);
  d.form = {};
  CHECK_THROWS_AS(AffineControlSystem{d}, ConfigError);

  d = skewed(false);
  d.form = [](const Vector&) { return Matrix{{1, 2}, {2, 1}}; };
  const AffineControlSystem indefinite(d);
  CHECK_THROWS_AS(ell(indefinite, {Vector{{0, 0}}, Vector{{1, 0}}}), ConfigError);

  d = skewed(false);
  d.mu = [](const Vector&) { return -1.0; };
  CHECK_THROWS_AS(AffineControlSystem{d}.mu(Vector{{0, 0}}), ConfigError);

  const AffineControlSystem ok(skewed(false));
  CHECK_THROWS_AS(ell(ok, {Vector{{0, 0, 0}}, Vector{{1, 0, 0}}}), ConfigError);
}

TEST_CASE("lambda solves P lambda = M^T psi and ell is its Q-length") {
  const AffineControlSystem sys(skewed(true));
  const CotangentPoint pt{Vector{{0.3, 0.9}}, Vector{{-1.2, 0.5}}};
  const Matrix M = sys.control_fields(pt.z), P = sys.form(pt.z);
  const Vector lambda = lambda_map(sys, pt);
  CHECK((P * lambda - M.transpose() * pt.psi).norm() < 1e-13);
  CHECK(ell(sys, pt) == doctest::Approx(std::sqrt(lambda.dot(P * lambda))));
  // lambda maximizes psi . M u over the unit Q-ball.
  const double best = pt.psi.dot(M * lambda) / ell(sys, pt);
  for (int k = 0; k < 64; ++k) {
    const double th = k * 2 * M_PI / 64;
    Vector u{{std::cos(th), std::sin(th)}};
    u /= std::sqrt(u.dot(P * u));
    CHECK(pt.psi.dot(M * u) <= best + 1e-12);
  }
}

TEST_CASE("optimal control has Q = sigma^2 along lambda") {
  const AffineControlSystem sys(skewed(true));
  const DoglegParams params(0.5, 2);
  const CotangentPoint pt{Vector{{0.3, 0.9}}, Vector{{-1.2, 0.5}}};
  const Vector u = optimal_control(sys, params, pt);
  const double l = ell(sys, pt) / sys.mu(pt.z);
  CHECK(quadratic_form_value(sys, pt.z, u) == doctest::Approx(std::pow(sigma(params, l), 2)));
  const Vector lambda = lambda_map(sys, pt);
  CHECK(std::abs(u(0) * lambda(1) - u(1) * lambda(0)) < 1e-14);
  CHECK(u.dot(lambda) > 0);
  CHECK(optimal_control(sys, params, {pt.z, Vector::Zero(2)}).norm() == 0);
}

TEST_CASE("vector field rejects inadmissible controls") {
  const AffineControlSystem sys(skewed(true));
  const Vector z{{0.0, 0.0}};
  CHECK_THROWS_AS(vector_field(sys, z, Vector{{2.0, 0.0}}), DomainError);
  const Vector u{{0.1, 0.2}};
  CHECK((vector_field(sys, z, u) - (sys.drift(z) + sys.control_fields(z) * u)).norm() == 0);
}
