#pragma once

// Scenario files are `key = value` lines; `#` starts a comment. The first
// meaningful key must be `schema_version = 1`. Keys:
//
//   id, c, mu_ratio, x_f, y_f, radius (reciprocal | unit), alpha, p, h,
//   variant (default | mi | ke), x0_lo, x0_hi, step
//
// Unknown or repeated keys are rejected.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "modpot/projectile.hpp"

namespace modpot {

inline constexpr int kScenarioSchemaVersion = 1;

ProjectileScenario parse_scenario(const std::string& text);
ProjectileScenario load_scenario(const std::string& path);
std::string format_scenario(const ProjectileScenario& scn);

RadiusProfile parse_radius(const std::string& s);
CostVariant parse_variant(const std::string& s);

// Columns t,x,y,psi1,psi2,u1,u2,H with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Position at time t by linear interpolation between samples.
Vector position_at(const Trajectory& traj, double t);

struct SummaryExtras {
  double mp_violation = 0;
  int mp_grid = 0;
  bool fixed_time = false;
};

// Summary sidecar: launch point, duration, level, drift, audit, marks at
// t_j = j/4.
nlohmann::json summary_json(const ProjectileScenario& scn, const SynthesisSolution& sol,
                            const SummaryExtras& extras);

nlohmann::json scenario_json(const ProjectileScenario& scn);
ProjectileScenario scenario_from_json(const nlohmann::json& j);

}  // namespace modpot
