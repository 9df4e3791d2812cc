#include "modpot/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace modpot {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("scenario: '" + key + "' expects a number, got '" + value + "'");
  }
  if (used != value.size()) {
    throw ConfigError("scenario: trailing characters in '" + key + "' value '" + value + "'");
  }
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RadiusProfile parse_radius(const std::string& s) {
  if (s == "reciprocal") return RadiusProfile::Reciprocal;
  if (s == "unit") return RadiusProfile::Unit;
  throw ConfigError("unknown radius profile '" + s + "' (reciprocal | unit)");
}

CostVariant parse_variant(const std::string& s) {
  if (s == "default") return CostVariant::SectionFive;
  if (s == "mi") return CostVariant::SectionTwoMi;
  if (s == "ke") return CostVariant::SectionTwoKe;
  throw ConfigError("unknown cost variant '" + s + "' (default | mi | ke)");
}

ProjectileScenario parse_scenario(const std::string& text) {
  static const std::set<std::string> known = {"schema_version", "id", "c", "mu_ratio", "x_f",
                                              "y_f", "radius", "alpha", "p", "h", "variant",
                                              "x0_lo", "x0_hi", "step"};
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("scenario line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known.count(key)) {
      throw ConfigError("scenario line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (first && key != "schema_version") {
      throw ConfigError("scenario: schema_version must come first");
    }
    first = false;
    if (!kv.emplace(key, value).second) {
      throw ConfigError("scenario: duplicate key '" + key + "'");
    }
  }
  if (!kv.count("schema_version")) throw ConfigError("scenario: missing schema_version");
  if (parse_number("schema_version", kv["schema_version"]) != kScenarioSchemaVersion) {
    throw ConfigError("scenario: unsupported schema_version " + kv["schema_version"]);
  }
  for (const char* key : {"c", "mu_ratio", "x_f", "y_f"}) {
    if (!kv.count(key)) throw ConfigError(std::string("scenario: missing required key '") + key + "'");
  }

  auto num = [&](const char* key, double fallback) {
    return kv.count(key) ? parse_number(key, kv[key]) : fallback;
  };
  ProjectileScenario scn;
  if (kv.count("id")) scn.id = kv["id"];
  scn.c = num("c", scn.c);
  scn.mu_ratio = num("mu_ratio", scn.mu_ratio);
  scn.x_f = num("x_f", scn.x_f);
  scn.y_f = num("y_f", scn.y_f);
  if (kv.count("radius")) scn.radius = parse_radius(kv["radius"]);
  if (kv.count("variant")) scn.variant = parse_variant(kv["variant"]);
  const bool two = scn.variant != CostVariant::SectionFive;
  try {
    scn.params = DoglegParams(num("alpha", two ? 1.0 : 0.5), num("p", 2));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  scn.h = num("h", 0);
  if (kv.count("x0_lo")) scn.x0_lo = parse_number("x0_lo", kv["x0_lo"]);
  if (kv.count("x0_hi")) scn.x0_hi = parse_number("x0_hi", kv["x0_hi"]);
  scn.step = num("step", scn.step);
  scn.validate();
  return scn;
}

ProjectileScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string format_scenario(const ProjectileScenario& scn) {
  std::ostringstream os;
  os << "schema_version = " << kScenarioSchemaVersion << "\n";
  os << "id = " << scn.id << "\n";
  os << "c = " << fmt17(scn.c) << "\n";
  os << "mu_ratio = " << fmt17(scn.mu_ratio) << "\n";
  os << "x_f = " << fmt17(scn.x_f) << "\n";
  os << "y_f = " << fmt17(scn.y_f) << "\n";
  os << "radius = " << to_string(scn.radius) << "\n";
  os << "alpha = " << fmt17(scn.params.alpha()) << "\n";
  os << "p = " << fmt17(scn.params.p()) << "\n";
  os << "h = " << fmt17(scn.h) << "\n";
  os << "variant = " << to_string(scn.variant) << "\n";
  if (scn.x0_lo) os << "x0_lo = " << fmt17(*scn.x0_lo) << "\n";
  if (scn.x0_hi) os << "x0_hi = " << fmt17(*scn.x0_hi) << "\n";
  os << "step = " << fmt17(scn.step) << "\n";
  return os.str();
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x,y,psi1,psi2,u1,u2,H\n";
  char buf[512];
  for (const auto& s : traj.samples) {
    if (s.z.size() != 2 || s.u.size() != 2) {
      throw ConfigError("write_trajectory_csv: expects a planar trajectory");
    }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  s.z(0), s.z(1), s.psi(0), s.psi(1), s.u(0), s.u(1), s.H);
    os << buf;
  }
}

Vector position_at(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  if (s.empty()) throw DomainError("position_at: empty trajectory");
  if (!(t >= s.front().t && t <= s.back().t)) {
    throw DomainError("position_at: time outside the trajectory");
  }
  auto it = std::lower_bound(s.begin(), s.end(), t,
                             [](const TrajectorySample& a, double v) { return a.t < v; });
  if (it == s.begin()) return it->z;
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double lambda = (t - a.t) / (b.t - a.t);
  return (1 - lambda) * a.z + lambda * b.z;
}

nlohmann::json scenario_json(const ProjectileScenario& scn) {
  nlohmann::json j;
  j["id"] = scn.id;
  j["c"] = scn.c;
  j["mu_ratio"] = scn.mu_ratio;
  j["x_f"] = scn.x_f;
  j["y_f"] = scn.y_f;
  j["radius"] = to_string(scn.radius);
  j["alpha"] = scn.params.alpha();
  j["p"] = scn.params.p();
  j["h"] = scn.h;
  j["variant"] = to_string(scn.variant);
  j["step"] = scn.step;
  return j;
}

ProjectileScenario scenario_from_json(const nlohmann::json& j) {
  try {
    ProjectileScenario scn;
    scn.id = j.at("id").get<std::string>();
    scn.c = j.at("c").get<double>();
    scn.mu_ratio = j.at("mu_ratio").get<double>();
    scn.x_f = j.at("x_f").get<double>();
    scn.y_f = j.at("y_f").get<double>();
    scn.radius = parse_radius(j.at("radius").get<std::string>());
    scn.params = DoglegParams(j.at("alpha").get<double>(), j.at("p").get<double>());
    scn.h = j.value("h", 0.0);
    scn.variant = parse_variant(j.value("variant", std::string("default")));
    scn.step = j.value("step", 1e-3);
    scn.validate();
    return scn;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario json: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("scenario json: ") + e.what());
  }
}

nlohmann::json summary_json(const ProjectileScenario& scn, const SynthesisSolution& sol,
                            const SummaryExtras& extras) {
  nlohmann::json j;
  j["status"] = "ok";
  j["scenario"] = scenario_json(scn);
  j["mode"] = extras.fixed_time ? "fixed_time" : "free_time";
  j["x0"] = sol.param;
  j["t_f"] = sol.t_final;
  j["h"] = sol.level;
  j["miss"] = sol.miss;
  j["iterations"] = sol.iterations;
  j["h_drift"] = sol.trajectory.meta.max_h_drift;
  j["conservation_tol"] = sol.trajectory.meta.conservation_tol;
  j["refined_steps"] = sol.trajectory.meta.refined_steps;
  j["mp_max_violation"] = extras.mp_violation;
  j["mp_grid_points"] = extras.mp_grid;
  j["saturation"] = saturation_flag(scn);
  j["samples"] = sol.trajectory.samples.size();
  nlohmann::json marks = nlohmann::json::array();
  for (int k = 0; k / 4.0 <= sol.t_final; ++k) {
    const Vector z = position_at(sol.trajectory, k / 4.0);
    marks.push_back({{"t", k / 4.0}, {"x", z(0)}, {"y", z(1)}});
  }
  j["marks"] = marks;
  return j;
}

}  // namespace modpot
