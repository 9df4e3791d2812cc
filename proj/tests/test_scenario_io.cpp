#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "modpot/scenario_io.hpp"

using namespace modpot;

namespace {
const char* kBase =
    "schema_version = 1\n"
    "id = demo  # trailing comment\n"
    "c = 2\n"
    "mu_ratio = 0.75\n"
    "x_f = 0.5\n"
    "y_f = 1\n";
}

TEST_CASE("parse a minimal scenario with defaults") {
  const auto s = parse_scenario(kBase);
  CHECK(s.id == "demo");
  CHECK(s.c == 2);
  CHECK(s.mu_ratio == 0.75);
  CHECK(s.radius == RadiusProfile::Unit);
  CHECK(s.params == DoglegParams(0.5, 2));
  CHECK(s.variant == CostVariant::SectionFive);
  CHECK_FALSE(s.x0_lo.has_value());
}

TEST_CASE("section-two variants default to alpha = 1") {
  const auto s = parse_scenario(
      "schema_version = 1\nvariant = mi\nc = 0.5\nmu_ratio = 1.5\nx_f = 1\ny_f = 2\n");
  CHECK(s.params == DoglegParams(1, 2));
}

TEST_CASE("format and parse round-trip exactly") {
  auto s = parse_scenario(std::string(kBase) + "radius = reciprocal\nalpha = 0.3\np = 3\nx0_lo = 0.6\nh = 0.1\n");
  s.mu_ratio = 1.0 / 3;
  const auto back = parse_scenario(format_scenario(s));
  CHECK(back.mu_ratio == s.mu_ratio);
  CHECK(back.radius == RadiusProfile::Reciprocal);
  CHECK(back.params == s.params);
  CHECK(back.h == s.h);
  CHECK(*back.x0_lo == *s.x0_lo);
  CHECK(format_scenario(back) == format_scenario(s));
}

TEST_CASE("malformed scenarios are rejected") {
  const std::string base = kBase;
  CHECK_THROWS_AS(parse_scenario("c = 2\nschema_version = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("schema_version = 2\nc = 2\nmu_ratio = 1\nx_f = 1\ny_f = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(base + "colour = blue\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(base + "c = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(base + "alpha = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(base + "p = two\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(base + "step = 0.1x\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(base + "radius = square\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(base + "no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("schema_version = 1\nc = 2\nx_f = 1\ny_f = 1\n"), ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.scn"), ConfigError);
}

TEST_CASE("trajectory CSV is stable and lossless") {
  Trajectory traj;
  for (int i = 0; i < 5; ++i) {
    TrajectorySample s;
    s.t = i * 0.1;
    s.z = Vector{{1.0 / 3 + i, 2.0 / 7}};
    s.psi = Vector{{-0.1 * i, 1.0}};
    s.u = Vector{{0.0, 0.9}};
    s.H = 1e-17 * i;
    traj.samples.push_back(s);
  }
  std::ostringstream a, b;
  write_trajectory_csv(a, traj);
  write_trajectory_csv(b, traj);
  CHECK(a.str() == b.str());
  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,y,psi1,psi2,u1,u2,H");
  std::getline(in, line);
  std::getline(in, line);
  const double x = std::stod(line.substr(line.find(',') + 1));
  CHECK(x == traj.samples[1].z(0));
}

TEST_CASE("position interpolation") {
  Trajectory traj;
  for (int i = 0; i < 3; ++i) {
    TrajectorySample s;
    s.t = i;
    s.z = Vector{{double(i), double(i * i)}};
    traj.samples.push_back(s);
  }
  CHECK(position_at(traj, 1.5)(1) == doctest::Approx(2.5));
  CHECK(position_at(traj, 0)(0) == 0);
  CHECK_THROWS_AS(position_at(traj, 2.5), DomainError);
}

TEST_CASE("scenario JSON round-trip") {
  const auto s = parse_scenario(std::string(kBase) + "radius = reciprocal\n");
  const auto back = scenario_from_json(scenario_json(s));
  CHECK(back.id == s.id);
  CHECK(back.radius == s.radius);
  CHECK(back.mu_ratio == s.mu_ratio);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"id", "x"}}), ConfigError);
}

TEST_CASE("summary sidecar") {
  const auto scn = parse_scenario(
      "schema_version = 1\nid = mi\nvariant = mi\nc = 0.5\nmu_ratio = 1.5\nx_f = 1\ny_f = 2\n");
  const auto sol = solve_free_time(make_shooting_problem(scn), default_solver_settings(scn));
  const auto j = summary_json(scn, sol, {-1e-9, 10201, false});
  CHECK(j["status"] == "ok");
  CHECK(j["mode"] == "free_time");
  CHECK(j["x0"].get<double>() == doctest::Approx(1.495349).epsilon(1e-6));
  CHECK(j["mp_grid_points"] == 10201);
  CHECK(j["saturation"] == false);
  const auto& marks = j["marks"];
  CHECK(marks.size() == std::size_t(std::floor(sol.t_final * 4)) + 1);
  CHECK(marks[0]["x"].get<double>() == doctest::Approx(sol.param));
}
