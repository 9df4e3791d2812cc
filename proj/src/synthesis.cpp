#include "modpot/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace modpot {

HamiltonianField hamiltonian_field(const PotentialContext& ctx, const CotangentPoint& pt) {
  const AffineControlSystem& sys = *ctx.sys;
  const ControlGeometry g = control_geometry(sys, pt);
  const int n = sys.state_dim();
  const double mu = sys.mu(pt.z);
  const double r = g.ell / mu;
  const bool moving = g.ell >= kEllZeroThreshold * mu;
  const double s = moving ? sigma(ctx.params, r) : 0.0;

  HamiltonianField out;
  out.dz = sys.drift(pt.z);
  if (moving) out.dz += (s / g.ell) * (g.fields * g.lambda);

  // dH/dz by the envelope property: only explicit z-dependence survives.
  Vector dHdz = sys.drift_jacobian(pt.z).transpose() * pt.psi;
  dHdz += sys.mu_gradient(pt.z) * (chi_hat(ctx.params, r) - r * s);
  dHdz -= sys.cost_gradient(pt.z);
  if (moving) {
    for (int i = 0; i < n; ++i) {
      const Matrix dM = sys.control_fields_partial(pt.z, i);
      const Matrix dP = sys.form_partial(pt.z, i);
      const double dell2 =
          2 * pt.psi.dot(dM * g.lambda) - g.lambda.dot(dP * g.lambda);
      dHdz(i) += s * dell2 / (2 * g.ell);
    }
  }
  out.dpsi = -dHdz;
  return out;
}

namespace {

struct Stepper {
  const PotentialContext& ctx;
  int n;

  Vector field(const Vector& y) const {
    CotangentPoint pt{y.head(n), y.tail(n)};
    const HamiltonianField f = hamiltonian_field(ctx, pt);
    Vector out(2 * n);
    out << f.dz, f.dpsi;
    return out;
  }

  Vector rk4(const Vector& y, double h) const {
    const Vector k1 = field(y);
    const Vector k2 = field(y + 0.5 * h * k1);
    const Vector k3 = field(y + 0.5 * h * k2);
    const Vector k4 = field(y + h * k3);
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }

  Vector rk4_sub(const Vector& y, double h, int pieces) const {
    Vector out = y;
    for (int i = 0; i < pieces; ++i) out = rk4(out, h / pieces);
    return out;
  }

  double energy(const Vector& y) const {
    return hamiltonian(ctx, CotangentPoint{y.head(n), y.tail(n)});
  }

  // One step of size h, halved recursively while |dH| exceeds tol. Returns
  // the deepest level used.
  int advance(Vector& y, double h, double tol, int max_depth, int depth = 0) const {
    const double h0 = energy(y);
    Vector trial = rk4(y, h);
    if (depth < max_depth && std::abs(energy(trial) - h0) > tol) {
      const int d1 = advance(y, h / 2, tol, max_depth, depth + 1);
      const int d2 = advance(y, h / 2, tol, max_depth, depth + 1);
      return std::max(d1, d2);
    }
    y = std::move(trial);
    return depth;
  }
};

bool all_finite(const Vector& v) { return v.allFinite(); }

TrajectorySample make_sample(const PotentialContext& ctx, double t, const Vector& y, int n) {
  TrajectorySample s;
  s.t = t;
  s.z = y.head(n);
  s.psi = y.tail(n);
  const CotangentPoint pt{s.z, s.psi};
  s.u = optimal_control(*ctx.sys, ctx.params, pt);
  s.H = hamiltonian(ctx, pt);
  return s;
}

}  // namespace

Trajectory integrate(const PotentialContext& ctx, const CotangentPoint& start,
                     const IntegrationSettings& settings) {
  if (!(settings.t_final > 0)) throw DomainError("integrate: t_final must be positive");
  if (!(settings.step > 0)) throw DomainError("integrate: step must be positive");
  ctx.sys->check_point(start);
  const int n = ctx.sys->state_dim();
  const Stepper stepper{ctx, n};

  Trajectory traj;
  traj.meta.alpha = ctx.params.alpha();
  traj.meta.p = ctx.params.p();
  traj.meta.scenario_id = settings.scenario_id;
  traj.meta.step = settings.step;
  traj.meta.conservation_tol = settings.conservation_tol;

  Vector y(2 * n);
  y << start.z, start.psi;
  traj.samples.push_back(make_sample(ctx, 0, y, n));
  const double h_start = traj.samples.front().H;
  if (settings.stop_event && !(settings.stop_event(start.z) > 0)) {
    throw DomainError("integrate: start point is not before the stop section");
  }

  const auto total_steps = static_cast<long>(std::ceil(settings.t_final / settings.step - 1e-9));
  double t = 0;
  for (long k = 0; k < total_steps; ++k) {
    const double h = std::min(settings.step, settings.t_final - t);
    if (!(h > 0)) break;
    Vector next = y;
    int depth = 0;
    try {
      depth = stepper.advance(next, h, settings.local_drift_tol, settings.max_halvings);
    } catch (const DomainError& e) {
      traj.meta.status = TrajectoryStatus::Truncated;
      traj.meta.message = e.what();
      break;
    }
    if (!all_finite(next)) {
      throw ConvergenceError("integrate: non-finite state at t = " + std::to_string(t + h));
    }
    if (depth > 0) ++traj.meta.refined_steps;

    if (settings.stop_event && !(settings.stop_event(next.head(n)) > 0)) {
      // Locate the crossing on the partial step of the same resolution.
      const int pieces = 1 << depth;
      auto crossing = [&](double tau) {
        if (tau <= 0) return settings.stop_event(y.head(n));
        return settings.stop_event(stepper.rk4_sub(y, tau, pieces).head(n));
      };
      numerics::RootProblem<double> prob;
      prob.objective = crossing;
      prob.lo = 0;
      prob.hi = h;
      prob.rel_tol = 1e-15;
      prob.abs_tol = 1e-16;
      prob.f_tol = 1e-15;
      const double tau = numerics::find_root(prob);
      y = tau > 0 ? stepper.rk4_sub(y, tau, pieces) : y;
      t += tau;
      traj.samples.push_back(make_sample(ctx, t, y, n));
      traj.meta.status = TrajectoryStatus::EventReached;
      break;
    }
    y = std::move(next);
    t = (k + 1 == total_steps) ? settings.t_final : t + h;
    traj.samples.push_back(make_sample(ctx, t, y, n));
  }

  // A zero-length final step can appear when the event fires exactly at a
  // grid point; keep times strictly increasing.
  if (traj.samples.size() >= 2 &&
      !(traj.samples.back().t > traj.samples[traj.samples.size() - 2].t)) {
    traj.samples.erase(traj.samples.end() - 2);
  }

  for (const auto& s : traj.samples) {
    traj.meta.max_h_drift = std::max(traj.meta.max_h_drift, std::abs(s.H - h_start));
  }
  if (settings.stop_event && traj.meta.status == TrajectoryStatus::Complete) {
    traj.meta.status = TrajectoryStatus::Truncated;
    traj.meta.message = "stop section not reached before t_final";
  }
  return traj;
}

Trajectory integrate(const PotentialContext& ctx, const CotangentPoint& start, double t_final,
                     double step) {
  IntegrationSettings settings;
  settings.t_final = t_final;
  settings.step = step;
  return integrate(ctx, start, settings);
}

CotangentPoint launch_point(const ShootingProblem& problem, double param, double level) {
  const Vector z = problem.launch_state(param);
  const Vector d = problem.launch_direction(param);
  auto excess = [&](double a) {
    return hamiltonian(problem.ctx, CotangentPoint{z, a * d}) - level;
  };
  const double base = excess(0);
  if (!(base < 0)) {
    throw InfeasibleError("launch point at parameter " + std::to_string(param) +
                          ": H at zero covector is not below the level");
  }
  double hi = 1;
  while (!(excess(hi) > 0)) {
    hi *= 2;
    if (hi > 1e12) {
      throw InfeasibleError("launch point: level unreachable along the launch direction");
    }
  }
  numerics::RootProblem<double> prob;
  prob.objective = excess;
  prob.lo = 0;
  prob.hi = hi;
  prob.rel_tol = 1e-15;
  prob.abs_tol = 0;
  prob.f_tol = 1e-15 * (1 + std::abs(level));
  prob.max_iter = 400;
  const double a = numerics::find_root(prob);
  return {z, a * d};
}

Trajectory shoot(const ShootingProblem& problem, double param, double level,
                 const SolverSettings& settings) {
  IntegrationSettings is;
  is.step = settings.step;
  is.t_final = settings.t_max;
  is.local_drift_tol = settings.local_drift_tol;
  is.max_halvings = settings.max_halvings;
  is.conservation_tol = settings.conservation_tol;
  is.stop_event = problem.arrival;
  is.scenario_id = problem.id;
  return integrate(problem.ctx, launch_point(problem, param, level), is);
}

namespace {

double arrival_miss(const ShootingProblem& problem, const Trajectory& traj) {
  if (traj.meta.status != TrajectoryStatus::EventReached) {
    throw InfeasibleError("trajectory did not reach the arrival section: " + traj.meta.message);
  }
  return problem.miss(traj.back().z);
}

}  // namespace

SynthesisSolution solve_free_time(const ShootingProblem& problem, const SolverSettings& settings) {
  if (!(problem.param_lo < problem.param_hi)) {
    throw ConfigError("solve_free_time: empty parameter bracket");
  }
  int evaluations = 0;
  Trajectory best;
  double best_param = 0, best_miss = std::numeric_limits<double>::infinity();
  auto residual = [&](double param) {
    ++evaluations;
    Trajectory traj = shoot(problem, param, problem.level, settings);
    const double m = arrival_miss(problem, traj);
    if (std::abs(m) < std::abs(best_miss)) {
      best_miss = m;
      best_param = param;
      best = std::move(traj);
    }
    return m;
  };

  const double f_lo = residual(problem.param_lo);
  const double f_hi = residual(problem.param_hi);
  if (std::signbit(f_lo) == std::signbit(f_hi) && f_lo != 0 && f_hi != 0) {
    throw InfeasibleError("solve_free_time: miss does not change sign on [" +
                          std::to_string(problem.param_lo) + ", " +
                          std::to_string(problem.param_hi) + "]");
  }
  numerics::RootProblem<double> prob;
  prob.objective = residual;
  prob.lo = problem.param_lo;
  prob.hi = problem.param_hi;
  prob.rel_tol = 1e-15;
  prob.f_tol = settings.miss_tol;
  prob.max_iter = settings.max_iter;
  numerics::find_root(prob);
  if (!(std::abs(best_miss) <= settings.miss_tol)) {
    throw ConvergenceError("solve_free_time: best miss " + std::to_string(best_miss) +
                           " exceeds tolerance");
  }

  SynthesisSolution sol;
  sol.trajectory = std::move(best);
  sol.param = best_param;
  sol.level = problem.level;
  sol.t_final = sol.trajectory.duration();
  sol.miss = best_miss;
  sol.iterations = evaluations;
  return sol;
}

SynthesisSolution solve_fixed_time(const ShootingProblem& problem, double t_final,
                                   const SolverSettings& settings,
                                   std::optional<std::pair<double, double>> guess) {
  if (!(t_final > 0)) throw DomainError("solve_fixed_time: t_final must be positive");
  if (!guess) {
    const SynthesisSolution seed = solve_free_time(problem, settings);
    guess = {seed.param, seed.level};
  }
  SolverSettings run = settings;
  run.t_max = std::max(settings.t_max, 4 * t_final);

  struct Eval {
    bool ok = false;
    Eigen::Vector2d res;
    Trajectory traj;
  };
  auto evaluate = [&](double param, double level) {
    Eval e;
    try {
      e.traj = shoot(problem, param, level, run);
      e.res << arrival_miss(problem, e.traj), e.traj.duration() - t_final;
      e.ok = e.res.allFinite();
    } catch (const InfeasibleError&) {
    } catch (const DomainError&) {
    }
    return e;
  };
  auto converged = [&](const Eigen::Vector2d& r) {
    return std::abs(r(0)) <= settings.miss_tol && std::abs(r(1)) <= settings.time_tol;
  };

  Eigen::Vector2d x(guess->first, guess->second);
  Eval cur = evaluate(x(0), x(1));
  if (!cur.ok) throw InfeasibleError("solve_fixed_time: initial guess is infeasible");

  for (int iter = 0; iter < settings.max_iter; ++iter) {
    if (converged(cur.res)) {
      SynthesisSolution sol;
      sol.trajectory = std::move(cur.traj);
      sol.param = x(0);
      sol.level = x(1);
      sol.t_final = sol.trajectory.duration();
      sol.miss = cur.res(0);
      sol.iterations = iter;
      return sol;
    }
    Eigen::Matrix2d jac;
    for (int j = 0; j < 2; ++j) {
      const double dx = 1e-7 * (1 + std::abs(x(j)));
      Eigen::Vector2d xp = x, xm = x;
      xp(j) += dx;
      xm(j) -= dx;
      const Eval ep = evaluate(xp(0), xp(1));
      const Eval em = evaluate(xm(0), xm(1));
      if (ep.ok && em.ok) {
        jac.col(j) = (ep.res - em.res) / (2 * dx);
      } else if (ep.ok) {
        jac.col(j) = (ep.res - cur.res) / dx;
      } else if (em.ok) {
        jac.col(j) = (cur.res - em.res) / dx;
      } else {
        throw InfeasibleError("solve_fixed_time: no feasible neighbourhood for the Jacobian");
      }
    }
    const Eigen::Vector2d delta = jac.fullPivLu().solve(-cur.res);
    if (!delta.allFinite()) throw ConvergenceError("solve_fixed_time: singular Jacobian");

    double damping = 1;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, damping /= 2) {
      const Eigen::Vector2d trial = x + damping * delta;
      Eval e = evaluate(trial(0), trial(1));
      if (e.ok && e.res.norm() < cur.res.norm()) {
        x = trial;
        cur = std::move(e);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw ConvergenceError("solve_fixed_time: damped Newton stalled at residual " +
                             std::to_string(cur.res.norm()));
    }
  }
  throw ConvergenceError("solve_fixed_time: exceeded " + std::to_string(settings.max_iter) +
                         " iterations");
}

MaximumPrincipleReport verify_maximum_principle(const PotentialContext& ctx,
                                                const Trajectory& traj, int grid_n,
                                                std::size_t stride) {
  if (grid_n < 2) throw DomainError("verify_maximum_principle: grid_n must be at least 2");
  if (stride == 0) stride = 1;
  const AffineControlSystem& sys = *ctx.sys;
  const int k = sys.control_dim();
  const double alpha = ctx.params.alpha(), p = ctx.params.p();

  // Unit-ball grid in whitened coordinates v, with the incentive shape
  // (1 - |v|^p)^alpha / (alpha p) precomputed; u = L^{-T} v for P = L L^T.
  double total = 1;
  for (int i = 0; i < k; ++i) total *= grid_n;
  if (total > 2e7) throw DomainError("verify_maximum_principle: control grid too large");
  std::vector<Eigen::VectorXd> ball;
  std::vector<double> shape;
  Eigen::VectorXi idx = Eigen::VectorXi::Zero(k);
  for (long flat = 0; flat < static_cast<long>(total); ++flat) {
    long rem = flat;
    Vector v(k);
    for (int i = 0; i < k; ++i) {
      idx(i) = static_cast<int>(rem % grid_n);
      rem /= grid_n;
      v(i) = -1 + 2.0 * idx(i) / (grid_n - 1);
    }
    const double norm = v.norm();
    if (norm > 1) continue;
    ball.push_back(v);
    shape.push_back(std::pow(1 - std::pow(norm, p), alpha) / (alpha * p));
  }

  MaximumPrincipleReport report;
  report.grid_points = static_cast<int>(ball.size());
  for (std::size_t i = 0; i < traj.samples.size(); i += stride) {
    const TrajectorySample& s = traj.samples[i];
    const CotangentPoint pt{s.z, s.psi};
    Vector u = s.u;
    const double qu = quadratic_form_value(sys, s.z, u);
    if (qu > 1) u /= std::sqrt(qu);
    const double at_u = control_hamiltonian(ctx, pt, u);

    const Matrix P = sys.form(s.z);
    Eigen::LLT<Matrix> llt(P);
    if (llt.info() != Eigen::Success) throw ConfigError("form matrix is not SPD");
    // psi . M u with u = L^{-T} v equals (L^{-1} M^T psi) . v.
    const Vector b = llt.matrixL().solve(sys.control_fields(s.z).transpose() * s.psi);
    const double base = pt.psi.dot(sys.drift(s.z)) - sys.unmoderated_cost(s.z);
    const double mu = sys.mu(s.z);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ball.size(); ++j) {
      best = std::max(best, b.dot(ball[j]) + mu * shape[j]);
    }
    const double violation = base + best - at_u;
    if (report.samples_checked == 0 || violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_sample = i;
    }
    ++report.samples_checked;
  }
  return report;
}

}  // namespace modpot
