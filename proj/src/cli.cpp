#include "modpot/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "modpot/potential.hpp"
#include "modpot/projectile.hpp"
#include "modpot/scenario_io.hpp"
#include "modpot/verification.hpp"

namespace modpot {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

using ScalarFn = std::function<double(double)>;

ScalarFn family_function(const std::string& name, const DoglegParams& params) {
  if (name == "rho") return [params](double s) { return rho(params, s); };
  if (name == "rho_inverse") return [params](double r) { return rho_inverse(params, r); };
  if (name == "sigma") return [params](double l) { return sigma(params, l); };
  if (name == "sigma_log") return [params](double l) { return sigma_log_limit(params.p(), l); };
  if (name == "chi_hat") return [params](double r) { return chi_hat(params, r); };
  if (name == "sigma_hat") return [params](double phi) { return sigma_hat(params, phi); };
  throw ConfigError("unknown function '" + name + "'");
}

// Runs `body` and maps library errors to exit codes, with a JSON diagnostic
// on `out` when `diag` is set.
int guarded(std::ostream& out, std::ostream& err, const std::function<int()>& body,
            const std::function<void(const std::string&, const std::string&)>& diag = {}) {
  auto fail = [&](int code, const char* status, const std::exception& e) {
    err << "error: " << e.what() << "\n";
    if (diag) diag(status, e.what());
    return code;
  };
  try {
    return body();
  } catch (const ConfigError& e) {
    return fail(kExitUsage, "config_error", e);
  } catch (const DomainError& e) {
    return fail(kExitUsage, "domain_error", e);
  } catch (const InfeasibleError& e) {
    return fail(kExitInfeasible, "infeasible", e);
  } catch (const ConvergenceError& e) {
    return fail(kExitConvergence, "convergence_failure", e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    (void)out;
    return kExitFailures;
  }
}

struct EvalArgs {
  std::string fn = "sigma";
  double alpha = 0.5;
  double p = 2;
  std::string grid = "0:10:0.1";
  std::string format = "csv";
  std::string out_path;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const DoglegParams params(a.alpha, a.p);
  const auto f = family_function(a.fn, params);
  const auto xs = parse_values(a.grid);
  std::vector<double> ys;
  ys.reserve(xs.size());
  for (double x : xs) ys.push_back(f(x));

  std::ostringstream body;
  if (a.format == "csv") {
    body << "x," << a.fn << "\n";
    for (std::size_t i = 0; i < xs.size(); ++i) body << fmt17(xs[i]) << "," << fmt17(ys[i]) << "\n";
  } else {
    nlohmann::json j;
    j["fn"] = a.fn;
    j["alpha"] = a.alpha;
    j["p"] = a.p;
    j["rows"] = nlohmann::json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) j["rows"].push_back({xs[i], ys[i]});
    body << j.dump(2) << "\n";
  }
  if (a.out_path.empty()) {
    out << body.str();
  } else {
    std::ofstream f_out(a.out_path);
    if (!f_out) throw ConfigError("cannot write '" + a.out_path + "'");
    f_out << body.str();
  }
  return kExitOk;
}

struct SynthArgs {
  std::string scenario;
  std::optional<double> t_final;
  std::string variant;
  std::string out_dir = ".";
  int grid_n = 101;
};

ProjectileScenario with_variant(ProjectileScenario scn, const std::string& variant) {
  if (variant.empty()) return scn;
  scn.variant = parse_variant(variant);
  if (scn.variant != CostVariant::SectionFive) scn.params = DoglegParams(1, 2);
  scn.validate();
  return scn;
}

int cmd_synthesize(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  std::string id = "scenario";
  auto write_summary = [&](const nlohmann::json& j) {
    fs::create_directories(a.out_dir);
    std::ofstream f(fs::path(a.out_dir) / (id + "_summary.json"));
    f << j.dump(2) << "\n";
    out << j.dump(2) << "\n";
  };
  ProjectileScenario scn;
  auto diag = [&](const std::string& status, const std::string& message) {
    nlohmann::json j;
    j["status"] = status;
    j["message"] = message;
    j["scenario_id"] = id;
    try {
      write_summary(j);
    } catch (const std::exception&) {
      out << j.dump(2) << "\n";
    }
  };
  return guarded(
      out, err,
      [&] {
        scn = with_variant(load_scenario(a.scenario), a.variant);
        id = scn.id;
        if (a.grid_n < 3) throw ConfigError("--grid-n must be at least 3");
        const auto problem = make_shooting_problem(scn);
        const auto settings = default_solver_settings(scn);
        const SynthesisSolution sol = a.t_final ? solve_fixed_time(problem, *a.t_final, settings)
                                                : solve_free_time(problem, settings);
        const auto mp = verify_maximum_principle(problem.ctx, sol.trajectory, a.grid_n);
        fs::create_directories(a.out_dir);
        {
          std::ofstream csv(fs::path(a.out_dir) / (id + "_trajectory.csv"));
          if (!csv) throw ConfigError("cannot write into '" + a.out_dir + "'");
          write_trajectory_csv(csv, sol.trajectory);
        }
        write_summary(summary_json(scn, sol, {mp.max_violation, mp.grid_points, a.t_final.has_value()}));
        return kExitOk;
      },
      diag);
}

struct SweepArgs {
  std::string scenario;
  std::string param = "mu_ratio";
  std::string values;
  std::string format = "csv";
  std::string out_path;
  int jobs = 0;
};

struct SweepRow {
  double value = 0;
  std::string status = "ok";
  double x0 = NAN, t_f = NAN;
  std::string message;
  int code = kExitOk;
};

void set_param(ProjectileScenario& scn, const std::string& name, double v) {
  static const std::map<std::string, double ProjectileScenario::*> fields = {
      {"mu_ratio", &ProjectileScenario::mu_ratio}, {"c", &ProjectileScenario::c},
      {"x_f", &ProjectileScenario::x_f},           {"y_f", &ProjectileScenario::y_f},
      {"h", &ProjectileScenario::h}};
  auto it = fields.find(name);
  if (it == fields.end()) throw ConfigError("cannot sweep '" + name + "' (mu_ratio | c | x_f | y_f | h)");
  scn.*(it->second) = v;
}

SweepRow sweep_row(ProjectileScenario scn, const std::string& param, double v) {
  SweepRow row;
  row.value = v;
  try {
    set_param(scn, param, v);
    scn.id += "_" + param + "_" + fmt17(v);
    scn.validate();
    const auto sol = solve_free_time(make_shooting_problem(scn), default_solver_settings(scn));
    row.x0 = sol.param;
    row.t_f = sol.t_final;
  } catch (const InfeasibleError& e) {
    row = {v, "infeasible", NAN, NAN, e.what(), kExitInfeasible};
  } catch (const ConvergenceError& e) {
    row = {v, "convergence_failure", NAN, NAN, e.what(), kExitConvergence};
  } catch (const std::exception& e) {
    row = {v, "invalid", NAN, NAN, e.what(), kExitUsage};
  }
  return row;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(out, err, [&] {
    const ProjectileScenario base = load_scenario(a.scenario);
    const auto values = parse_values(a.values);
    ProjectileScenario probe = base;
    set_param(probe, a.param, values.front());  // rejects unknown names up front

    const int jobs = a.jobs > 0 ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepRow> rows(values.size());
    for (std::size_t start = 0; start < values.size(); start += jobs) {
      std::vector<std::future<SweepRow>> batch;
      const std::size_t stop = std::min(values.size(), start + jobs);
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(std::async(std::launch::async, sweep_row, base, a.param, values[i]));
      }
      for (std::size_t i = start; i < stop; ++i) rows[i] = batch[i - start].get();
    }

    std::ostringstream body;
    if (a.format == "csv") {
      body << a.param << ",x0,t_f,status\n";
      for (const auto& r : rows) {
        body << fmt17(r.value) << "," << fmt17(r.x0) << "," << fmt17(r.t_f) << "," << r.status << "\n";
      }
    } else {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : rows) {
        nlohmann::json e = {{a.param, r.value}, {"status", r.status}};
        if (r.code == kExitOk) {
          e["x0"] = r.x0;
          e["t_f"] = r.t_f;
        } else {
          e["message"] = r.message;
        }
        j.push_back(e);
      }
      body << j.dump(2) << "\n";
    }
    if (a.out_path.empty()) {
      out << body.str();
    } else {
      std::ofstream f(a.out_path);
      if (!f) throw ConfigError("cannot write '" + a.out_path + "'");
      f << body.str();
    }
    for (const auto& r : rows) {
      if (r.code != kExitOk) err << "row " << fmt17(r.value) << ": " << r.status << ": " << r.message << "\n";
    }
    const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.code == kExitOk; });
    if (any_ok) return int(kExitOk);
    const bool any_conv = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.code == kExitConvergence; });
    return int(any_conv ? kExitConvergence : kExitInfeasible);
  });
}

struct VerifyArgs {
  std::string level = "fast";
  std::string golden = default_golden_path();
  bool regenerate = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(out, err, [&] {
    if (a.regenerate) {
      std::vector<GoldenEntry> entries;
      for (const auto& fc : figure_scenarios()) entries.push_back(quadrature_solution(fc.scn));
      write_golden(a.golden, entries);
      out << "wrote " << entries.size() << " golden entries to " << a.golden << "\n";
    }
    const auto level = a.level == "full" ? VerifyLevel::Full : VerifyLevel::Fast;
    const auto results = run_verification(level, a.golden);
    int failures = 0;
    char buf[96];
    for (const auto& r : results) {
      std::snprintf(buf, sizeof buf, "%-4s %-24s %7.2fs  ", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
      out << buf << r.detail << "\n";
      failures += !r.pass;
    }
    out << (failures ? std::to_string(failures) + " check(s) failed" : "all checks passed") << "\n";
    return failures ? int(kExitFailures) : int(kExitOk);
  });
}

}  // namespace

std::vector<double> parse_values(const std::string& spec) {
  if (spec.empty()) throw ConfigError("empty value specification");
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("range must be a:b:step, got '" + spec + "'");
    const double a = parse_double(parts[0]), b = parse_double(parts[1]), step = parse_double(parts[2]);
    if (!(step > 0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw ConfigError("range '" + spec + "' needs finite bounds and a positive step");
    }
    if (b < a) throw ConfigError("range '" + spec + "' is empty");
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
    if (n > 10'000'000) throw ConfigError("range '" + spec + "' has too many points");
    for (long i = 0; i < n; ++i) out.push_back(a + i * step);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_double(item));
  }
  if (out.empty()) throw ConfigError("value list '" + spec + "' is empty");
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moderated optimal control: dogleg incentives and trajectory synthesis", "modpot"};
  app.require_subcommand(1);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Tabulate a family function over a grid");
  eval->add_option("--fn", ev.fn, "rho | rho_inverse | sigma | sigma_log | chi_hat | sigma_hat")
      ->check(CLI::IsMember({"rho", "rho_inverse", "sigma", "sigma_log", "chi_hat", "sigma_hat"}));
  eval->add_option("--alpha", ev.alpha, "Shape alpha in (0, 1]");
  eval->add_option("--p", ev.p, "Exponent p >= 1");
  eval->add_option("--grid", ev.grid, "a:b:step or comma list");
  eval->add_option("--format", ev.format)->check(CLI::IsMember({"csv", "json"}));
  eval->add_option("--out", ev.out_path, "Write here instead of stdout");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synthesize", "Solve a projectile synthesis problem");
  synth->add_option("--scenario", sy.scenario, "Scenario file")->required();
  synth->add_option("--t-final", sy.t_final, "Fixed final time (free time when absent)");
  synth->add_option("--variant", sy.variant, "Cost variant override")->check(CLI::IsMember({"default", "mi", "ke"}));
  synth->add_option("--out-dir", sy.out_dir, "Directory for the CSV and summary");
  synth->add_option("--grid-n", sy.grid_n, "Audit grid points per axis");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Solve over a range of one scenario parameter");
  sweep->add_option("--scenario", sw.scenario, "Scenario file")->required();
  sweep->add_option("--param", sw.param, "mu_ratio | c | x_f | y_f | h");
  sweep->add_option("--values", sw.values, "a:b:step or comma list")->required();
  sweep->add_option("--format", sw.format)->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--out", sw.out_path, "Write here instead of stdout");
  sweep->add_option("--jobs", sw.jobs, "Parallel rows (default: hardware threads)");

  VerifyArgs vr;
  auto* verify = app.add_subcommand("verify", "Run the invariant suites");
  verify->add_option("--level", vr.level)->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--golden", vr.golden, "Pinned figure solutions");
  verify->add_flag("--regenerate-golden", vr.regenerate, "Recompute and overwrite the pinned file first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (*eval) return guarded(out, err, [&] { return cmd_eval(ev, out); });
  if (*synth) return cmd_synthesize(sy, out, err);
  if (*sweep) return cmd_sweep(sw, out, err);
  return cmd_verify(vr, out, err);
}

}  // namespace modpot
