#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modpot/numerics.hpp"
#include "oracles.hpp"

using namespace modpot;
using namespace modpot::numerics;

TEST_CASE("find_root with and without derivative") {
  auto f = [](double x) { return x * x * x - 2 * x - 5; };
  const double root = 2.0945514815423265;
  CHECK(find_root(f, 2.0, 3.0, 1e-14) == doctest::Approx(root).epsilon(1e-13));

  RootProblem<double> prob;
  prob.objective = f;
  prob.derivative = [](double x) { return 3 * x * x - 2; };
  prob.lo = 0;
  prob.hi = 10;
  prob.rel_tol = 1e-15;
  CHECK(find_root(prob) == doctest::Approx(root).epsilon(1e-14));

  // Decreasing objective.
  CHECK(find_root([](double x) { return 1 - x * x; }, 0.0, 3.0, 1e-14) == doctest::Approx(1));
}

TEST_CASE("find_root errors") {
  CHECK_THROWS_AS(find_root([](double x) { return x * x + 1; }, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(find_root([](double x) { return x; }, 1.0, -1.0), DomainError);
  RootProblem<double> prob;
  prob.objective = [](double x) { return std::tanh(x - 0.3); };
  prob.lo = -100;
  prob.hi = 100;
  prob.rel_tol = 0;
  prob.max_iter = 3;
  CHECK_THROWS_AS(find_root(prob), ConvergenceError);
}

TEST_CASE("softplus and sigmoid stay finite") {
  CHECK(softplus(1000.0) == doctest::Approx(1000));
  CHECK(softplus(-1000.0) == 0);
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(sigmoid(-1000.0) == 0);
  CHECK(sigmoid(1000.0) == 1);
  CHECK(sigmoid(-30.0) == doctest::Approx(std::exp(-30.0)).epsilon(1e-12));
}

TEST_CASE("quadrature with endpoint singularities") {
  auto upper = integrate_singular([](double x) { return 1 / std::sqrt(1 - x); }, 0, 1, SingularEnd::Upper);
  CHECK(upper.value == doctest::Approx(2).epsilon(1e-12));
  auto lower = integrate_singular([](double x) { return std::cos(x) / std::sqrt(x); }, 0, 1, SingularEnd::Lower);
  // int_0^1 cos(x)/sqrt(x) dx = sqrt(2 pi) C(sqrt(2/pi)), Fresnel C.
  CHECK(lower.value == doctest::Approx(1.8090484757993222).epsilon(1e-11));
  auto smooth = integrate_singular([](double x) { return std::sin(x); }, 0, 2, SingularEnd::None);
  CHECK(smooth.value == doctest::Approx(1 - std::cos(2.0)).epsilon(1e-13));
  CHECK(integrate_singular([](double) { return 1.0; }, 1, 1, SingularEnd::Upper).value == 0);
}

TEST_CASE("offset quadrature hands over the exact distance") {
  const double b = 1 + 1e-9;
  // 1/sqrt(b - x) loses everything to cancellation next to b; 1/sqrt(d) does not.
  auto r = integrate_singular_offset([](double, double d) { return 1 / std::sqrt(d); }, 1, b,
                                     SingularEnd::Upper, 1e-16);
  CHECK(r.value == doctest::Approx(2 * std::sqrt(1e-9)).epsilon(1e-10));
  auto low = integrate_singular_offset([](double x, double d) { return (x - d) + 1 / std::sqrt(d); }, 2, 3,
                                       SingularEnd::Lower);
  // x - d = 2 on the whole interval.
  CHECK(low.value == doctest::Approx(4).epsilon(1e-12));
}

TEST_CASE("Carlson integrals against reference values") {
  CHECK(carlson_rf(1, 2, 0) == doctest::Approx(1.31102877714605991).epsilon(1e-14));
  CHECK(carlson_rf(2, 3, 4) == doctest::Approx(0.584082841677151707).epsilon(1e-14));
  CHECK(carlson_rd(0, 2, 1) == doctest::Approx(1.79721035210338831).epsilon(1e-14));
  CHECK(carlson_rd(2, 3, 4) == doctest::Approx(0.165105272942610533).epsilon(1e-14));
}

TEST_CASE("Legendre integrals") {
  CHECK(elliptic_F(0.7, -2.5) == doctest::Approx(0.609600672906008202).epsilon(1e-14));
  CHECK(elliptic_E(0.7, -2.5) == doctest::Approx(0.814059438185611926).epsilon(1e-14));
  CHECK(elliptic_F(1.2, 0.6) == doctest::Approx(1.38132268788185817).epsilon(1e-14));
  CHECK(elliptic_E(1.2, 0.6) == doctest::Approx(1.0562923277786216).epsilon(1e-14));
  for (double m : {-20.0, -1.0, 0.0, 0.3, 0.9}) {
    for (double phi : {0.1, 0.8, 1.5}) {
      CHECK(elliptic_F(phi, m) == doctest::Approx(oracle::elliptic_f(phi, m)).epsilon(1e-10));
      CHECK(elliptic_E(phi, m) == doctest::Approx(oracle::elliptic_e(phi, m)).epsilon(1e-10));
    }
  }
}

TEST_CASE("modulus convention squares its argument") {
  CHECK(elliptic_F(1.0, 0.6, EllipticConvention::Modulus) == doctest::Approx(elliptic_F(1.0, 0.36)));
  CHECK(elliptic_E(1.0, 0.6, EllipticConvention::Modulus) == doctest::Approx(elliptic_E(1.0, 0.36)));
  // A negative parameter read as a modulus leaves the real domain.
  CHECK_THROWS_AS(elliptic_F(1.2, -5.0, EllipticConvention::Modulus), DomainError);
  CHECK_THROWS_AS(elliptic_F(1.2, 1.5), DomainError);
}
