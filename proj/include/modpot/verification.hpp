#pragma once

// Invariant suites behind `modpot verify`, and the pinned figure scenarios
// with their golden launch points and durations.

#include <string>
#include <vector>

#include "modpot/projectile.hpp"

namespace modpot {

enum class VerifyLevel { Fast, Full };

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct FigureCase {
  std::string figure;  // "arcs", "recip", "unit"
  ProjectileScenario scn;
};

// Scenario grids for the three trajectory figures. Unit-radius members whose
// target height is out of reach are left out (see `unreachable_figure_cases`).
std::vector<FigureCase> figure_scenarios();
std::vector<FigureCase> unreachable_figure_cases();

struct GoldenEntry {
  std::string id;
  double x0 = 0;
  double t_f = 0;
};

// Launch point and duration from the quadrature pipeline alone.
GoldenEntry quadrature_solution(const ProjectileScenario& scn);

enum class ClosedFormKind {
  Logarithmic,  // alpha = 1/2, r = 1/x
  Elliptic,     // alpha = 1/2, r = 1
  Ellipse,      // alpha = 1, unsaturated
  Saturated,    // alpha = 1, phi >= 1: the elliptic forms without the v factor
};

struct TriangleCase {
  ProjectileScenario scn;
  ClosedFormKind kind;
};

// Closed-form eligible scenarios used for three-way agreement.
std::vector<TriangleCase> triangle_cases();

struct TriangleReport {
  std::string id;
  double x0 = 0;
  double y_ode = 0, y_quad = 0, y_closed = 0;
  double t_ode = 0, t_quad = 0, t_closed = 0;
  double h_drift = 0;
  double max_y_gap() const;
  double max_t_gap() const;
};

// Shoots the ODE, then evaluates quadrature and closed form at the same x0.
TriangleReport triangle_check(const TriangleCase& tc);

// ODE solve of one figure member with its invariant audit.
struct FigureRun {
  FigureCase fc;
  bool ok = false;
  std::string error;
  SynthesisSolution sol;
  double psi2_drift = 0;
  MaximumPrincipleReport mp;
  double seconds = 0;
};
FigureRun run_figure_case(const FigureCase& fc, int mp_grid = 101, std::size_t mp_stride = 5);

// max | |z(t)| - radius | along the path.
double radial_spread(const Trajectory& traj, double radius);

struct SpeedProfile {
  bool monotone = false;  // |u| never decreases
  double initial_speed = 0;
  double final_speed = 0;
  double early_dx = 0;  // displacement over the first quarter of the flight
  double early_dy = 0;
};
SpeedProfile speed_profile(const Trajectory& traj);

std::string default_golden_path();
std::vector<GoldenEntry> load_golden(const std::string& path);
void write_golden(const std::string& path, const std::vector<GoldenEntry>& entries);

std::vector<CheckResult> run_verification(VerifyLevel level,
                                          const std::string& golden_path = default_golden_path());

}  // namespace modpot
