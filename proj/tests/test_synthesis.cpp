#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modpot/projectile.hpp"
#include "modpot/synthesis.hpp"

using namespace modpot;

namespace {

// Pendulum-like drift with state-dependent fields and form.
PotentialContext driven(const DoglegParams& params) {
  AffineControlSystem::Data d;
  d.state_dim = 2;
  d.control_dim = 2;
  d.drift = [](const Vector& z) { return Vector{{0.3 * z(1), -0.2 * std::sin(z(0))}}; };
  d.control_fields = [](const Vector& z) { return Matrix{{1 + 0.1 * z(0) * z(0), 0.2}, {0.1 * z(1), 1.0}}; };
  d.form = [](const Vector& z) { return Matrix{{2 + std::cos(z(0)), 0.3}, {0.3, 1 + 0.5 * z(1) * z(1)}}; };
  d.mu = [](const Vector& z) { return 0.8 + 0.2 * z(0) * z(0); };
  d.unmoderated_cost = [](const Vector& z) { return 1.5 + 0.1 * z.squaredNorm(); };
  return {std::make_shared<const AffineControlSystem>(d), params};
}

double fd_partial(const PotentialContext& ctx, CotangentPoint pt, bool in_z, int i) {
  const double h = 1e-6;
  Vector& v = in_z ? pt.z : pt.psi;
  v(i) += h;
  const double up = hamiltonian(ctx, pt);
  v(i) -= 2 * h;
  return (up - hamiltonian(ctx, pt)) / (2 * h);
}

ProjectileScenario section_two_mi() {
  ProjectileScenario s;
  s.id = "mi";
  s.c = 0.5;
  s.mu_ratio = 1.5;
  s.x_f = 1;
  s.y_f = 2;
  s.params = DoglegParams(1, 2);
  s.variant = CostVariant::SectionTwoMi;
  return s;
}

}  // namespace

TEST_CASE("Hamiltonian field is the symplectic gradient of H") {
  for (auto [alpha, p] : {std::pair{0.5, 2.0}, {0.3, 3.0}, {1.0, 2.0}, {0.7, 1.0}}) {
    const auto ctx = driven(DoglegParams(alpha, p));
    for (const auto& pt : {CotangentPoint{Vector{{0.4, -0.3}}, Vector{{1.1, 0.6}}},
                           CotangentPoint{Vector{{-1.0, 0.8}}, Vector{{-0.3, 2.0}}}}) {
      const auto f = hamiltonian_field(ctx, pt);
      for (int i = 0; i < 2; ++i) {
        INFO("alpha=" << alpha << " p=" << p << " i=" << i);
        CHECK(f.dz(i) == doctest::Approx(fd_partial(ctx, pt, false, i)).epsilon(1e-7));
        CHECK(f.dpsi(i) == doctest::Approx(-fd_partial(ctx, pt, true, i)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("RK4 conserves H and converges at fourth order") {
  const auto ctx = driven(DoglegParams(0.5, 2));
  const CotangentPoint start{Vector{{0.2, 0.1}}, Vector{{0.7, -0.4}}};
  const auto fine = integrate(ctx, start, 2.0, 1e-4);
  CHECK(fine.meta.status == TrajectoryStatus::Complete);
  CHECK(fine.conserves_energy());
  CHECK(fine.duration() == doctest::Approx(2.0));
  // Plain fixed steps: no drift-triggered halving.
  IntegrationSettings plain;
  plain.t_final = 2.0;
  plain.max_halvings = 0;
  plain.step = 0.04;
  const auto coarse = integrate(ctx, start, plain);
  plain.step = 0.02;
  const auto half = integrate(ctx, start, plain);
  const double e1 = (coarse.back().z - fine.back().z).norm();
  const double e2 = (half.back().z - fine.back().z).norm();
  CHECK(e1 / e2 > 10);
  CHECK(e1 / e2 < 24);
  CHECK(fine.meta.max_h_drift < 1e-10);
}

TEST_CASE("stop event locates the section crossing") {
  const auto ctx = driven(DoglegParams(0.5, 2));
  const CotangentPoint start{Vector{{0.2, 0.1}}, Vector{{0.7, -0.4}}};
  IntegrationSettings s;
  s.step = 1e-2;
  s.t_final = 5;
  // y falls monotonically on this run.
  const double target = -1.5;
  s.stop_event = [&](const Vector& z) { return z(1) - target; };
  const auto traj = integrate(ctx, start, s);
  REQUIRE(traj.meta.status == TrajectoryStatus::EventReached);
  CHECK(traj.back().z(1) == doctest::Approx(target).epsilon(1e-12));
  // Same crossing seen by a much finer run.
  const auto fine = integrate(ctx, start, traj.duration() + 0.01, 1e-4);
  double t_cross = 0;
  for (std::size_t i = 1; i < fine.samples.size(); ++i) {
    if (fine.samples[i].z(1) <= target) {
      const auto& a = fine.samples[i - 1];
      const auto& b = fine.samples[i];
      t_cross = a.t + (target - a.z(1)) / (b.z(1) - a.z(1)) * (b.t - a.t);
      break;
    }
  }
  CHECK(traj.duration() == doctest::Approx(t_cross).epsilon(1e-7));
}

TEST_CASE("an event that never fires leaves the run truncated") {
  const auto ctx = driven(DoglegParams(0.5, 2));
  IntegrationSettings s;
  s.t_final = 0.1;
  s.stop_event = [](const Vector&) { return 1.0; };
  const auto traj = integrate(ctx, {Vector{{0.2, 0.1}}, Vector{{0.7, -0.4}}}, s);
  CHECK(traj.meta.status == TrajectoryStatus::Truncated);
}

TEST_CASE("leaving the state domain truncates instead of throwing") {
  // r = 1/x breaks down as x reaches zero.
  ProjectileScenario scn;
  scn.radius = RadiusProfile::Reciprocal;
  const auto ctx = make_context(scn);
  const auto traj = integrate(ctx, {Vector{{0.3, 0}}, Vector{{-3, 0.1}}}, 5.0, 1e-3);
  CHECK(traj.meta.status == TrajectoryStatus::Truncated);
  CHECK_FALSE(traj.meta.message.empty());
  CHECK(traj.duration() < 5.0);
}

TEST_CASE("free-time shooting recovers the closed-form launch point") {
  const auto scn = section_two_mi();
  const auto sol = solve_free_time(make_shooting_problem(scn), default_solver_settings(scn));
  CHECK(sol.param == doctest::Approx(std::pow(5.0, 0.25)).epsilon(1e-10));
  CHECK(std::abs(sol.miss) <= 1e-10);
  CHECK(sol.trajectory.back().z(0) == doctest::Approx(1).epsilon(1e-12));
  CHECK(sol.trajectory.back().z(1) == doctest::Approx(2).epsilon(1e-9));
  CHECK(sol.trajectory.meta.max_h_drift < 1e-9);
  CHECK(sol.level == 0);
}

TEST_CASE("fixed-time shooting moves the level to meet the deadline") {
  const auto scn = section_two_mi();
  const auto problem = make_shooting_problem(scn);
  const auto settings = default_solver_settings(scn);
  const auto free = solve_free_time(problem, settings);
  for (double dt : {-0.3, 0.5}) {
    const double t_final = free.t_final + dt;
    const auto fixed = solve_fixed_time(problem, t_final, settings);
    CHECK(fixed.t_final == doctest::Approx(t_final).epsilon(1e-9));
    CHECK(fixed.trajectory.back().z(1) == doctest::Approx(2).epsilon(1e-8));
    CHECK(fixed.level != doctest::Approx(0));
    CHECK(fixed.trajectory.meta.max_h_drift < 1e-8);
  }
}

TEST_CASE("launch point sits on the requested level") {
  const auto scn = section_two_mi();
  const auto problem = make_shooting_problem(scn);
  const auto pt = launch_point(problem, 2.0, 0.0);
  CHECK(std::abs(hamiltonian(problem.ctx, pt)) < 1e-13);
  CHECK(pt.psi(0) == 0);
  CHECK(pt.psi(1) > 0);
  // Below this level even a zero covector has H above it.
  CHECK_THROWS_AS(launch_point(problem, 2.0, -10.0), InfeasibleError);
}

TEST_CASE("maximum principle audit") {
  const auto scn = section_two_mi();
  const auto problem = make_shooting_problem(scn);
  const auto sol = solve_free_time(problem, default_solver_settings(scn));
  const auto rep = verify_maximum_principle(problem.ctx, sol.trajectory, 101, 5);
  CHECK(rep.max_violation <= 1e-6);
  CHECK(rep.samples_checked > 100);

  // Halving the recorded control must show up as a violation.
  Trajectory slow = sol.trajectory;
  for (auto& s : slow.samples) s.u *= 0.5;
  CHECK(verify_maximum_principle(problem.ctx, slow, 101, 5).max_violation > 1e-3);
  CHECK_THROWS(verify_maximum_principle(problem.ctx, sol.trajectory, 1));
}
