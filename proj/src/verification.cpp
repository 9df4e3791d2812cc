#include "modpot/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "modpot/potential.hpp"

#ifndef MODPOT_GOLDEN_DIR
#define MODPOT_GOLDEN_DIR "tests/golden"
#endif

namespace modpot {

namespace {

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

CheckResult timed(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  CheckResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto [ok, detail] = body();
    r.pass = ok;
    r.detail = detail;
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

ProjectileScenario section_two(const std::string& id, double c, double mu, double x_f, double y_f,
                               CostVariant v) {
  ProjectileScenario s;
  s.id = id;
  s.c = c;
  s.mu_ratio = mu;
  s.x_f = x_f;
  s.y_f = y_f;
  s.radius = RadiusProfile::Unit;
  s.params = DoglegParams(1, 2);
  s.variant = v;
  return s;
}

// (c, x_f, moderation ratios) for the reciprocal and unit grids.
struct Row {
  double c, x_f;
  std::vector<double> m;
};
std::vector<Row> late_rows() {
  const double r3 = std::sqrt(3.0);
  return {{2.0 / 3, 0.1, {0.05, 1 / r3, 2 / r3 - 0.05}},
          {2.0, 0.1, {0.05, 1, 1.95}},
          {2.0, 0.5, {0.05, 1, 1.95}}};
}

ProjectileScenario late_scenario(const char* fig, RadiusProfile radius, double c, double x_f,
                                 double m) {
  ProjectileScenario s;
  s.id = std::string(fig) + fmt("_c%.4g_xf%.4g_m%.4g", c, x_f, m);
  s.c = c;
  s.x_f = x_f;
  s.y_f = 1;
  s.mu_ratio = m;
  s.radius = radius;
  s.params = DoglegParams(0.5, 2);
  return s;
}

// Unit radius members whose reachable height stays below y_f = 1.
bool unreachable(double c, double m) {
  return (c < 1 && m > 1) || (c == 2.0 && m > 1.5);
}

double gap(double a, double b) { return std::abs(a - b); }

}  // namespace

std::vector<FigureCase> figure_scenarios() {
  std::vector<FigureCase> out;
  for (double c : {0.5, 1.5}) {
    for (double x_f : {1.0, 3.0}) {
      const double mu_min = 1 + c / (2 * x_f * x_f);
      const std::string tag = fmt("_c%.4g_xf%.4g", c, x_f);
      out.push_back({"arcs", section_two("arcs_mi_min" + tag, c, mu_min, x_f, 2, CostVariant::SectionTwoMi)});
      out.push_back({"arcs", section_two("arcs_mi_two" + tag, c, 2, x_f, 2, CostVariant::SectionTwoMi)});
      out.push_back({"arcs", section_two("arcs_ke_min" + tag, c, mu_min, x_f, 2, CostVariant::SectionTwoKe)});
    }
  }
  for (const auto& row : late_rows()) {
    for (double m : row.m) out.push_back({"recip", late_scenario("recip", RadiusProfile::Reciprocal, row.c, row.x_f, m)});
  }
  for (const auto& row : late_rows()) {
    for (double m : row.m) {
      if (unreachable(row.c, m)) continue;
      out.push_back({"unit", late_scenario("unit", RadiusProfile::Unit, row.c, row.x_f, m)});
    }
  }
  return out;
}

std::vector<FigureCase> unreachable_figure_cases() {
  std::vector<FigureCase> out;
  for (const auto& row : late_rows()) {
    for (double m : row.m) {
      if (unreachable(row.c, m)) {
        out.push_back({"unit", late_scenario("unit", RadiusProfile::Unit, row.c, row.x_f, m)});
      }
    }
  }
  return out;
}

GoldenEntry quadrature_solution(const ProjectileScenario& scn) {
  const auto [lo, hi] = launch_bracket(scn);
  auto miss = [&](double x0) { return y_quadrature(scn, scn.x_f, x0) - scn.y_f; };
  numerics::RootProblem<double> prob;
  prob.objective = miss;
  prob.lo = lo;
  prob.hi = hi;
  prob.rel_tol = 1e-14;
  prob.abs_tol = 1e-14;
  prob.f_tol = 1e-12;
  prob.max_iter = 200;
  const double x0 = numerics::find_root(prob);
  return {scn.id, x0, t_quadrature(scn, scn.x_f, x0)};
}

std::vector<TriangleCase> triangle_cases() {
  std::vector<TriangleCase> out;
  {
    ProjectileScenario s;
    s.id = "tri_log";
    s.c = 2;
    s.mu_ratio = 1;
    s.x_f = 0.1;
    s.y_f = 1;
    s.radius = RadiusProfile::Reciprocal;
    out.push_back({s, ClosedFormKind::Logarithmic});
  }
  {
    ProjectileScenario s;
    s.id = "tri_elliptic";
    s.c = 2;
    s.mu_ratio = 1;
    s.x_f = 0.5;
    s.y_f = 1;
    s.radius = RadiusProfile::Unit;
    out.push_back({s, ClosedFormKind::Elliptic});
  }
  out.push_back({section_two("tri_ellipse", 0.5, 1.5, 1, 2, CostVariant::SectionTwoMi),
                 ClosedFormKind::Ellipse});
  out.push_back({section_two("tri_ellipse_wide", 1.5, 1.8, 1, 2, CostVariant::SectionTwoMi),
                 ClosedFormKind::Ellipse});
  {
    ProjectileScenario s;
    s.id = "tri_saturated";
    s.c = 2;
    s.mu_ratio = 0.8;
    s.x_f = 0.5;
    s.y_f = 1;
    s.radius = RadiusProfile::Unit;
    s.params = DoglegParams(1, 2);
    out.push_back({s, ClosedFormKind::Saturated});
  }
  return out;
}

double TriangleReport::max_y_gap() const {
  return std::max({gap(y_ode, y_quad), gap(y_ode, y_closed), gap(y_quad, y_closed)});
}

double TriangleReport::max_t_gap() const {
  return std::max({gap(t_ode, t_quad), gap(t_ode, t_closed), gap(t_quad, t_closed)});
}

TriangleReport triangle_check(const TriangleCase& tc) {
  const auto& scn = tc.scn;
  const auto sol = solve_free_time(make_shooting_problem(scn), default_solver_settings(scn));
  TriangleReport r;
  r.id = scn.id;
  r.x0 = sol.param;
  r.y_ode = sol.trajectory.back().z(1);
  r.t_ode = sol.t_final;
  r.h_drift = sol.trajectory.meta.max_h_drift;
  r.y_quad = y_quadrature(scn, scn.x_f, r.x0);
  r.t_quad = t_quadrature(scn, scn.x_f, r.x0);
  switch (tc.kind) {
    case ClosedFormKind::Logarithmic: {
      const auto cf = closed_form_log(scn, scn.x_f, r.x0);
      r.y_closed = corollary3_forms(scn, scn.x_f, r.x0).v * cf.y_tilde;
      r.t_closed = cf.t;
      break;
    }
    case ClosedFormKind::Elliptic: {
      const auto cf = closed_form_elliptic(scn, scn.x_f, r.x0);
      r.y_closed = corollary3_forms(scn, scn.x_f, r.x0).v * cf.y_tilde;
      r.t_closed = cf.t;
      break;
    }
    case ClosedFormKind::Ellipse: {
      const auto cf = ellipse_path(scn, scn.x_f, r.x0);
      r.y_closed = cf.y_tilde;
      r.t_closed = cf.t;
      break;
    }
    case ClosedFormKind::Saturated: {
      // Full speed throughout: the path is the unmoderated one, which the
      // alpha = 1/2 elliptic forms give as y~ with the same time integral.
      if (phi_region(scn, r.x0) != PhiRegion::Saturated) {
        throw DomainError("triangle_check: scenario is not saturated");
      }
      ProjectileScenario twin = scn;
      twin.params = DoglegParams(0.5, 2);
      const auto cf = closed_form_elliptic(twin, scn.x_f, r.x0);
      r.y_closed = cf.y_tilde;
      r.t_closed = cf.t;
      break;
    }
  }
  return r;
}

std::string default_golden_path() { return std::string(MODPOT_GOLDEN_DIR) + "/figures.json"; }

std::vector<GoldenEntry> load_golden(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open golden file '" + path + "'");
  try {
    const auto j = nlohmann::json::parse(in);
    std::vector<GoldenEntry> out;
    for (const auto& e : j.at("entries")) {
      out.push_back({e.at("id").get<std::string>(), e.at("x0").get<double>(), e.at("t_f").get<double>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("golden file '" + path + "': " + e.what());
  }
}

void write_golden(const std::string& path, const std::vector<GoldenEntry>& entries) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) j["entries"].push_back({{"id", e.id}, {"x0", e.x0}, {"t_f", e.t_f}});
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write golden file '" + path + "'");
  out << j.dump(2) << "\n";
}

FigureRun run_figure_case(const FigureCase& fc, int mp_grid, std::size_t mp_stride) {
  FigureRun run;
  run.fc = fc;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto problem = make_shooting_problem(fc.scn);
    run.sol = solve_free_time(problem, default_solver_settings(fc.scn));
    const auto& s = run.sol.trajectory.samples;
    for (const auto& sample : s) {
      run.psi2_drift = std::max(run.psi2_drift, std::abs(sample.psi(1) - s.front().psi(1)));
    }
    run.mp = verify_maximum_principle(problem.ctx, run.sol.trajectory, mp_grid, mp_stride);
    run.ok = true;
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

double radial_spread(const Trajectory& traj, double radius) {
  double worst = 0;
  for (const auto& s : traj.samples) worst = std::max(worst, std::abs(s.z.norm() - radius));
  return worst;
}

SpeedProfile speed_profile(const Trajectory& traj) {
  SpeedProfile sp;
  const auto& s = traj.samples;
  double prev = -1;
  sp.monotone = true;
  for (const auto& sample : s) {
    const double v = sample.u.norm();
    if (prev >= 0 && v < prev * (1 - 1e-9)) sp.monotone = false;
    prev = v;
  }
  sp.initial_speed = s.front().u.norm();
  sp.final_speed = s.back().u.norm();
  // Displacement over the first quarter of the flight time.
  const double t_q = traj.duration() / 4;
  auto it = std::find_if(s.begin(), s.end(), [&](const TrajectorySample& a) { return a.t >= t_q; });
  const Vector d = it->z - s.front().z;
  sp.early_dx = std::abs(d(0));
  sp.early_dy = std::abs(d(1));
  return sp;
}

namespace {

std::pair<bool, std::string> oracle_grid(int cases, std::uint64_t seed) {
  constexpr int kGrid = 20001;
  const double spacing = 1.0 / (kGrid - 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  double worst = 0;
  std::string worst_case;
  for (int i = 0; i < cases; ++i) {
    const double alpha = unit(rng) < 0.15 ? 1.0 : 0.02 + 0.98 * unit(rng);
    const double p = alpha == 1 ? 1.1 + 3.9 * unit(rng) : 1 + 4 * unit(rng);
    const double ell = std::pow(10.0, -2 + 4 * unit(rng));
    const DoglegParams params(alpha, p);
    const double err = std::abs(sigma(params, ell) - brute_force_sigma(params, ell, kGrid)) / spacing;
    if (err > worst) {
      worst = err;
      worst_case = fmt("alpha=%.4g p=%.4g l=%.4g", alpha, p, ell);
    }
  }
  return {worst <= 2, fmt("%g cases, worst %.3g grid spacings", cases, worst) + " at " + worst_case};
}

std::pair<bool, std::string> identity_suite() {
  double chi_tau = 0, round_trip = 0, closed = 0;
  const std::vector<std::pair<double, double>> shapes = {
      {0.5, 2}, {0.25, 4}, {0.3, 3}, {0.75, 1.5}, {0.9, 1}, {0.1, 2.5}, {1, 2}, {1, 3}, {1, 1.5}};
  for (auto [alpha, p] : shapes) {
    const DoglegParams params(alpha, p);
    for (int i = 1; i < 100; ++i) {
      const double s = i / 100.0;
      if (alpha < 1) {
        const double w = 1 - std::pow(s, p);
        const double lhs = chi_hat(params, rho(params, s));
        chi_tau = std::max(chi_tau, std::abs(lhs - tau(params, w)) / std::max(1.0, std::abs(lhs)));
      }
      const double r = std::pow(10.0, -2 + 4 * i / 99.0);
      const double back = sigma_hat(params, chi_hat(params, r));
      round_trip = std::max(round_trip, std::abs(back - sigma(params, r)));
      if (params.reciprocal() || params.saturating()) {
        closed = std::max(closed, std::abs(chi_hat(params, r) - chi_hat_general(params, r)) /
                                      std::max(1.0, chi_hat(params, r)));
        const double phi = chi_hat(params, r);
        closed = std::max(closed, std::abs(sigma_hat(params, phi) - sigma_hat_general(params, phi)));
        closed = std::max(closed, std::abs(sigma(params, r) - sigma_general(params, r)));
      }
    }
  }
  const bool ok = chi_tau <= 1e-10 && round_trip <= 1e-9 && closed <= 1e-10;
  return {ok, fmt("chi/tau %.2g, round trip %.2g, closed vs general %.2g", chi_tau, round_trip, closed)};
}

std::pair<bool, std::string> log_homotopy() {
  const std::vector<double> alphas = {0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
  bool ok = true;
  std::ostringstream detail;
  for (double ell : {0.1, 1.0, 10.0}) {
    const double target = sigma_log_limit(2.0, ell);
    double prev = INFINITY;
    double last = 0;
    for (double a : alphas) {
      last = std::abs(sigma(DoglegParams(a, 2), ell) - target);
      if (!(last < prev)) ok = false;
      prev = last;
    }
    if (!(last < 1e-2)) ok = false;
    detail << "l=" << ell << ": " << fmt("%.2g", last) << " ";
  }
  return {ok, detail.str()};
}

std::pair<bool, std::string> field_fd() {
  double worst = 0;
  std::vector<std::pair<ProjectileScenario, CotangentPoint>> pts;
  for (auto radius : {RadiusProfile::Unit, RadiusProfile::Reciprocal}) {
    for (auto [alpha, p] : {std::pair{0.5, 2.0}, {0.3, 3.0}, {1.0, 2.0}}) {
      ProjectileScenario s;
      s.radius = radius;
      s.params = DoglegParams(alpha, p);
      s.mu_ratio = 0.7;
      pts.push_back({s, CotangentPoint{Vector{{0.8, 0.3}}, Vector{{-0.4, 0.9}}}});
      pts.push_back({s, CotangentPoint{Vector{{1.3, -0.2}}, Vector{{0.2, 0.15}}}});
    }
  }
  for (const auto& [scn, pt] : pts) {
    const auto ctx = make_context(scn);
    const auto field = hamiltonian_field(ctx, pt);
    for (int i = 0; i < 2; ++i) {
      const double h = 1e-6;
      CotangentPoint a = pt, b = pt;
      a.psi(i) += h;
      b.psi(i) -= h;
      const double dpsi = (hamiltonian(ctx, a) - hamiltonian(ctx, b)) / (2 * h);
      a = pt;
      b = pt;
      a.z(i) += h;
      b.z(i) -= h;
      const double dz = (hamiltonian(ctx, a) - hamiltonian(ctx, b)) / (2 * h);
      worst = std::max({worst, std::abs(field.dz(i) - dpsi), std::abs(field.dpsi(i) + dz)});
    }
  }
  return {worst <= 1e-6, fmt("worst %.2g over %g points", worst, double(pts.size()))};
}

std::pair<bool, std::string> ellipse_vs_ode() {
  const auto scn = section_two("ellipse", 0.5, 1.5, 1, 2, CostVariant::SectionTwoMi);
  const double x0 = section2_x0(scn.c, scn.mu_ratio, scn.x_f, scn.y_f);
  const auto e = section52_solution(scn, x0);
  const double t_f = e.time_at(scn.x_f);
  double identity = 0;
  for (int i = 0; i <= 100; ++i) identity = std::max(identity, std::abs(e.identity_residual(t_f * i / 100)));
  const auto sol = solve_free_time(make_shooting_problem(scn), default_solver_settings(scn));
  double path = 0;
  for (const auto& s : sol.trajectory.samples) {
    path = std::max(path, (s.z - e.position(std::min(s.t, t_f))).norm());
  }
  const bool ok = identity <= 1e-12 && std::abs(sol.param - x0) <= 1e-6 && path <= 1e-6;
  return {ok, fmt("identity %.2g, x0 gap %.2g, path gap %.2g", identity, std::abs(sol.param - x0), path)};
}

std::pair<bool, std::string> golden_quadrature(const std::string& path) {
  const auto golden = load_golden(path);
  std::map<std::string, GoldenEntry> by_id;
  for (const auto& g : golden) by_id[g.id] = g;
  double worst = 0;
  std::string worst_id;
  int missing = 0;
  for (const auto& fc : figure_scenarios()) {
    auto it = by_id.find(fc.scn.id);
    if (it == by_id.end()) {
      ++missing;
      continue;
    }
    const auto q = quadrature_solution(fc.scn);
    const double err = std::max(gap(q.x0, it->second.x0), gap(q.t_f, it->second.t_f));
    if (err > worst) {
      worst = err;
      worst_id = fc.scn.id;
    }
  }
  const bool ok = missing == 0 && worst <= 1e-8;
  return {ok, fmt("%g missing, worst %.2g", missing, worst) + (worst_id.empty() ? "" : " at " + worst_id)};
}

std::pair<bool, std::string> triangle_suite() {
  double y = 0, t = 0;
  for (const auto& tc : triangle_cases()) {
    const auto r = triangle_check(tc);
    y = std::max(y, r.max_y_gap());
    t = std::max(t, r.max_t_gap());
  }
  return {y <= 1e-5 && t <= 1e-5, fmt("worst y gap %.2g, t gap %.2g", y, t)};
}

std::pair<bool, std::string> figure_ode(const std::string& path) {
  std::map<std::string, GoldenEntry> by_id;
  for (const auto& g : load_golden(path)) by_id[g.id] = g;
  double golden = 0, drift = 0, psi2 = 0, mp = -INFINITY;
  int failed = 0;
  std::string first_failure;
  for (const auto& fc : figure_scenarios()) {
    const auto run = run_figure_case(fc);
    if (!run.ok) {
      if (failed++ == 0) first_failure = fc.scn.id + ": " + run.error;
      continue;
    }
    auto it = by_id.find(fc.scn.id);
    if (it == by_id.end()) {
      if (failed++ == 0) first_failure = fc.scn.id + ": no golden entry";
      continue;
    }
    golden = std::max({golden, gap(run.sol.param, it->second.x0), gap(run.sol.t_final, it->second.t_f)});
    drift = std::max(drift, run.sol.trajectory.meta.max_h_drift);
    psi2 = std::max(psi2, run.psi2_drift);
    mp = std::max(mp, run.mp.max_violation);
  }
  const bool ok = failed == 0 && golden <= 1e-5 && drift <= 1e-6 && psi2 <= 1e-8 && mp <= 1e-5;
  std::string detail = fmt("golden gap %.2g, H drift %.2g, psi2 drift %.2g", golden, drift, psi2) +
                       fmt(", MP %.2g", mp);
  if (failed) detail += fmt(", %g failed", failed) + " (" + first_failure + ")";
  return {ok, detail};
}

}  // namespace

std::vector<CheckResult> run_verification(VerifyLevel level, const std::string& golden_path) {
  std::vector<CheckResult> out;
  out.push_back(timed("feedback_oracle", [&] { return oracle_grid(level == VerifyLevel::Full ? 200 : 50, 20240607); }));
  out.push_back(timed("potential_identities", identity_suite));
  out.push_back(timed("log_homotopy", log_homotopy));
  out.push_back(timed("hamiltonian_field_fd", field_fd));
  out.push_back(timed("ellipse_vs_ode", ellipse_vs_ode));
  out.push_back(timed("golden_quadrature", [&] { return golden_quadrature(golden_path); }));
  if (level == VerifyLevel::Full) {
    out.push_back(timed("triangle_consistency", triangle_suite));
    out.push_back(timed("figure_ode_vs_golden", [&] { return figure_ode(golden_path); }));
  }
  return out;
}

}  // namespace modpot
