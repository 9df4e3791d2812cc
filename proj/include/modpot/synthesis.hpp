#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modpot/potential.hpp"

namespace modpot {

// Canonical Hamiltonian vector field (dH/dpsi, -dH/dz) of H = chi - C^.
struct HamiltonianField {
  Vector dz;
  Vector dpsi;
};

HamiltonianField hamiltonian_field(const PotentialContext& ctx, const CotangentPoint& pt);

struct TrajectorySample {
  double t = 0;
  Vector z;
  Vector psi;
  Vector u;
  double H = 0;
};

enum class TrajectoryStatus {
  Complete,      // reached t_final
  EventReached,  // stopped on the arrival section
  Truncated,     // field evaluation failed mid-run; see message
};

struct TrajectoryMeta {
  double alpha = 0;
  double p = 0;
  std::string scenario_id;
  double step = 0;
  double conservation_tol = 0;
  double max_h_drift = 0;
  int refined_steps = 0;  // steps that were subdivided to control H drift
  TrajectoryStatus status = TrajectoryStatus::Complete;
  std::string message;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  TrajectoryMeta meta;

  const TrajectorySample& front() const { return samples.front(); }
  const TrajectorySample& back() const { return samples.back(); }
  double duration() const { return samples.back().t; }
  // Whether the recorded H drift stays within the conservation tolerance.
  bool conserves_energy() const { return meta.max_h_drift <= meta.conservation_tol; }
};

struct IntegrationSettings {
  double step = 1e-3;
  double t_final = 1;
  // A step whose |H change| exceeds this is redone as two half steps, at
  // most max_halvings levels deep.
  double local_drift_tol = 1e-11;
  int max_halvings = 8;
  double conservation_tol = 1e-6;
  // Integration stops where this changes sign from positive to non-positive.
  std::function<double(const Vector&)> stop_event;
  std::string scenario_id;
};

// Fixed-step classical RK4 with optional drift-triggered step halving.
Trajectory integrate(const PotentialContext& ctx, const CotangentPoint& start,
                     const IntegrationSettings& settings);
Trajectory integrate(const PotentialContext& ctx, const CotangentPoint& start, double t_final,
                     double step);

// Boundary-value description for shooting. A one-parameter start manifold
// `launch_state(param)` carries the covector `a * launch_direction(param)`,
// with a > 0 fixed by H = level. Integration stops on the section
// arrival(z) = 0 where the remaining condition miss(z) = 0 is imposed.
struct ShootingProblem {
  PotentialContext ctx;
  std::function<Vector(double)> launch_state;
  std::function<Vector(double)> launch_direction;
  std::function<double(const Vector&)> arrival;
  std::function<double(const Vector&)> miss;
  double param_lo = 0;
  double param_hi = 0;
  double level = 0;
  std::string id;
};

struct SolverSettings {
  double step = 1e-3;
  double t_max = 200;
  double miss_tol = 1e-10;
  double time_tol = 1e-10;
  int max_iter = 100;
  double local_drift_tol = 1e-11;
  int max_halvings = 8;
  double conservation_tol = 1e-6;
};

struct SynthesisSolution {
  Trajectory trajectory;
  double param = 0;
  double level = 0;
  double t_final = 0;
  double miss = 0;
  int iterations = 0;
};

// Start point on the launch manifold with |H - level| at rounding level.
CotangentPoint launch_point(const ShootingProblem& problem, double param, double level);

// Integrate from the launch point until the arrival section is crossed.
Trajectory shoot(const ShootingProblem& problem, double param, double level,
                 const SolverSettings& settings);

// Free-time synthesis: H = problem.level along the solution, shooting over
// the launch parameter within [param_lo, param_hi].
SynthesisSolution solve_free_time(const ShootingProblem& problem, const SolverSettings& settings);

// Fixed-time synthesis: two-parameter damped Newton over (param, level).
// Without a guess the free-time solution seeds the iteration.
SynthesisSolution solve_fixed_time(const ShootingProblem& problem, double t_final,
                                   const SolverSettings& settings,
                                   std::optional<std::pair<double, double>> guess = std::nullopt);

struct MaximumPrincipleReport {
  double max_violation = 0;  // max over samples of (grid max of H(psi, u)) - H(psi, u(t))
  std::size_t worst_sample = 0;
  std::size_t samples_checked = 0;
  int grid_points = 0;
};

// Audits each sample's control against a grid over the admissible ellipsoid.
MaximumPrincipleReport verify_maximum_principle(const PotentialContext& ctx,
                                                const Trajectory& traj, int grid_n,
                                                std::size_t stride = 1);

}  // namespace modpot
