// hapsisac: scenario validation, placement/trajectory design, baselines,
// parameter sweeps, and offline report replay. Artifacts are plain JSON/CSV
// written atomically into the run directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "haps/baselines.hpp"
#include "haps/placement.hpp"
#include "haps/runio.hpp"
#include "haps/trajectory.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitSolverFailure = 3;
constexpr int kExitUsage = 64;

struct Common {
  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double tol = -1.0;
  int max_iter = 10;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool needs_scenario = true) {
  auto* s = cmd->add_option("--scenario", c.scenario_path, "scenario JSON file");
  if (needs_scenario) s->required();
  cmd->add_option("--out", c.out_dir, "run directory (created if missing)");
  cmd->add_option("--seed", c.seed, "override the scenario rng seed")
      ->each([&c](const std::string&) { c.seed_set = true; });
  cmd->add_option("--tol", c.tol, "solver duality-gap tolerance");
  cmd->add_option("--max-iter", c.max_iter, "outer iteration cap");
  cmd->add_option("--jobs", c.jobs, "worker threads for independent solves");
}

haps::Scenario load(const Common& c) {
  haps::Scenario s = haps::load_scenario(c.scenario_path);
  if (c.seed_set) s.rng_seed = c.seed;
  if (c.tol > 0) {
    std::ostringstream v;
    v << c.tol;
    setenv("HAPSISAC_SOLVER_TOL", v.str().c_str(), 1);
  }
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out_dir.empty()) return;
  fs::create_directories(c.out_dir);
  haps::atomic_write((fs::path(c.out_dir) / name).string(), text);
}

json placement_json(const haps::Placement3D& p) {
  return {{"x", p.x}, {"y", p.y}, {"z", p.z}};
}

json beams_json(const haps::SlotBeams& b) {
  json j;
  j["w"] = json::array();
  for (const auto& w : b.w_cov) j["w"].push_back(haps::complex_matrix_json(w));
  if (!b.w_vec.empty()) {
    j["w_vec"] = json::array();
    for (const auto& w : b.w_vec)
      j["w_vec"].push_back(haps::complex_matrix_json(w));
  }
  j["r_s"] = haps::complex_matrix_json(b.r_s);
  j["total_power"] = b.total_power();
  return j;
}

json ledger_json(const haps::EnergyLedger& l) {
  json j;
  j["per_slot"] = l.per_slot;
  j["cumulative"] = l.cumulative;
  if (l.budget) j["budget"] = *l.budget;
  j["feasible"] = l.feasible;
  return j;
}

json static_json(const haps::StaticDesign& d) {
  json j;
  j["feasible"] = d.feasible;
  if (d.feasible) {
    j["placement"] = placement_json(d.placement);
    j["beams"] = beams_json(d.beams);
    j["objective"] = d.objective;
  }
  return j;
}

json dynamic_json(const haps::DynamicDesign& d) {
  json j;
  j["feasible"] = d.feasible;
  if (!d.detail.empty()) j["detail"] = d.detail;
  if (!d.feasible) return j;
  j["objective"] = d.objective;
  j["outer_objectives"] = d.outer_objectives;
  j["nodes"] = json::array();
  for (const auto& p : d.trajectory.nodes) j["nodes"].push_back(placement_json(p));
  j["slots"] = json::array();
  for (const auto& b : d.solution.slots) j["slots"].push_back(beams_json(b));
  j["p_ave"] = d.solution.p_ave;
  j["energy"] = ledger_json(d.ledger);
  return j;
}

std::string trace_csv(const haps::ConvergenceTrace& t) {
  std::string out = haps::csv_row({"iteration", "objective", "status", "seconds"});
  for (const auto& r : t.rows)
    out += haps::csv_row({std::to_string(r.iteration), std::to_string(r.objective),
                          haps::conic::to_string(r.status),
                          std::to_string(r.seconds)});
  return out;
}

std::string grid_csv(const std::vector<haps::GridPointResult>& table) {
  std::string out = haps::csv_row(
      {"x", "y", "z", "feasible", "objective", "iterations", "seconds"});
  for (const auto& r : table)
    out += haps::csv_row({std::to_string(r.placement.x), std::to_string(r.placement.y),
                          std::to_string(r.placement.z),
                          r.feasible ? "1" : "0", std::to_string(r.objective),
                          std::to_string(r.iterations), std::to_string(r.seconds)});
  return out;
}

std::string traj_csv(const haps::TrajectoryStepTrace& t) {
  std::string out = haps::csv_row({"iteration", "radius", "accepted", "objective"});
  for (const auto& r : t.rows)
    out += haps::csv_row({std::to_string(r.iteration), std::to_string(r.radius),
                          r.accepted ? "1" : "0", std::to_string(r.objective)});
  return out;
}

haps::GridSpec default_grid(const haps::Scenario& s, int nx, int ny,
                            double z_step) {
  haps::GridSpec g;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool first = true;
  const auto extend = [&](const haps::GroundPoint& p) {
    if (first) {
      x0 = x1 = p.x;
      y0 = y1 = p.y;
      first = false;
      return;
    }
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  };
  for (const auto& p : s.users) extend(p);
  for (const auto& p : s.targets) extend(p);
  if (x1 - x0 < 1.0) {
    x0 -= 1000;
    x1 += 1000;
  }
  if (y1 - y0 < 1.0) {
    y0 -= 1000;
    y1 += 1000;
  }
  g.x_min = x0;
  g.x_max = x1;
  g.y_min = y0;
  g.y_max = y1;
  g.nx = nx;
  g.ny = ny;
  g.z_step = z_step;
  return g;
}

void write_result(const Common& c, const std::string& name, json result,
                  const std::string& scenario_text, const std::string& command) {
  result["command"] = command;
  result["run_id"] = haps::run_id(scenario_text, command);
  result["scenario"] = json::parse(scenario_text);
  std::cout << result.dump(2) << "\n";
  emit(c, name + ".result.json", result.dump(2) + "\n");
}

int status_exit(bool feasible, bool solver_failed = false) {
  if (solver_failed) return kExitSolverFailure;
  return feasible ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint beamforming + deployment design for a stratospheric ISAC platform"};
  app.require_subcommand(1);

  Common c;
  int nx = 5, ny = 5;
  double z_step = 5000.0;
  std::string kind = "comm-only-static";
  std::string sweep_mode = "static";
  std::vector<double> sweep_pmax, sweep_gamma, sweep_snr;

  auto* validate = app.add_subcommand("validate", "parse + validate a scenario");
  add_common(validate, c);

  auto* sstatic = app.add_subcommand("solve-static", "quasi-stationary design");
  add_common(sstatic, c);
  sstatic->add_option("--nx", nx, "grid points along x");
  sstatic->add_option("--ny", ny, "grid points along y");
  sstatic->add_option("--z-step", z_step, "altitude grid step, m");

  auto* sdyn = app.add_subcommand("solve-dynamic", "trajectory + per-slot design");
  add_common(sdyn, c);

  auto* bl = app.add_subcommand("baseline", "reference designs");
  add_common(bl, c);
  bl->add_option("--kind", kind, "baseline name")->required();
  bl->add_option("--nx", nx, "grid points along x");
  bl->add_option("--ny", ny, "grid points along y");
  bl->add_option("--z-step", z_step, "altitude grid step, m");

  auto* sweep = app.add_subcommand("sweep", "one solve per parameter value");
  add_common(sweep, c);
  sweep->add_option("--pmax", sweep_pmax, "P_max values, W")->delimiter(',');
  sweep->add_option("--gamma", sweep_gamma, "beampattern thresholds, W")->delimiter(',');
  sweep->add_option("--snr-min", sweep_snr, "sensing SNR floors, linear")->delimiter(',');
  sweep->add_option("--mode", sweep_mode, "static | dynamic");

  auto* report = app.add_subcommand("report", "replay stored artifacts");
  add_common(report, c, /*needs_scenario=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (validate->parsed()) {
      json out;
      try {
        const haps::Scenario s = load(c);
        out["valid"] = true;
        out["users"] = s.num_users();
        out["targets"] = s.num_targets();
        out["slots"] = s.slots;
        std::cout << out.dump(2) << "\n";
        emit(c, "validate.result.json", out.dump(2) + "\n");
        return kExitOk;
      } catch (const std::exception& e) {
        out["valid"] = false;
        out["error"] = e.what();
        std::cout << out.dump(2) << "\n";
        emit(c, "validate.result.json", out.dump(2) + "\n");
        return kExitInfeasible;
      }
    }

    if (sstatic->parsed()) {
      const haps::Scenario s = load(c);
      const haps::GridSpec grid = default_grid(s, nx, ny, z_step);
      const haps::StaticDesign d = haps::solve_static(s, grid, c.jobs);
      emit(c, "grid.csv", grid_csv(d.table));
      emit(c, "trace.csv", trace_csv(d.trace));
      write_result(c, "solve-static", static_json(d), haps::serialize_scenario(s),
                   "solve-static");
      return status_exit(d.feasible);
    }

    if (sdyn->parsed()) {
      const haps::Scenario s = load(c);
      const haps::DynamicDesign d =
          haps::solve_dynamic(s, 1e-3, c.max_iter, c.jobs);
      emit(c, "trajectory.csv", traj_csv(d.traj_trace));
      write_result(c, "solve-dynamic", dynamic_json(d),
                   haps::serialize_scenario(s), "solve-dynamic");
      return status_exit(d.feasible,
                         !d.feasible && d.detail.find("solve failed") !=
                                            std::string::npos);
    }

    if (bl->parsed()) {
      haps::BaselineKind bk;
      if (!haps::baseline_from_string(kind, &bk)) {
        std::cerr << "unknown baseline kind: " << kind << "\n";
        return kExitUsage;
      }
      const haps::Scenario s = load(c);
      const haps::GridSpec grid = default_grid(s, nx, ny, z_step);
      const haps::BaselineDesign d = haps::solve_baseline(bk, s, grid, c.jobs);
      json out;
      bool feasible = false;
      if (const auto* sd = std::get_if<haps::StaticDesign>(&d)) {
        out = static_json(*sd);
        feasible = sd->feasible;
      } else {
        const auto& dd = std::get<haps::DynamicDesign>(d);
        out = dynamic_json(dd);
        feasible = dd.feasible;
      }
      out["baseline"] = kind;
      write_result(c, std::string("baseline-") + kind, out,
                   haps::serialize_scenario(s), std::string("baseline ") + kind);
      return status_exit(feasible);
    }

    if (sweep->parsed()) {
      int chosen = (!sweep_pmax.empty()) + (!sweep_gamma.empty()) +
                   (!sweep_snr.empty());
      if (chosen != 1) {
        std::cerr << "sweep needs exactly one non-empty value list "
                     "(--pmax | --gamma | --snr-min)\n";
        return kExitUsage;
      }
      if (sweep_mode != "static" && sweep_mode != "dynamic") {
        std::cerr << "--mode must be static or dynamic\n";
        return kExitUsage;
      }
      const haps::Scenario base = load(c);
      std::string param = !sweep_pmax.empty() ? "pmax"
                          : !sweep_gamma.empty() ? "gamma"
                                                 : "snr_min";
      const std::vector<double>& values = !sweep_pmax.empty() ? sweep_pmax
                                          : !sweep_gamma.empty() ? sweep_gamma
                                                                 : sweep_snr;
      const int n = static_cast<int>(values.size());
      std::vector<bool> feas(n, false);
      std::vector<double> obj(n, 0.0);
      std::vector<int> iters(n, 0);
      haps::parallel_for_indexed(n, c.jobs, [&](int i) {
        haps::Scenario s = base;
        if (param == "pmax") s.power_max = values[i];
        if (param == "gamma") s.bp_threshold = values[i];
        if (param == "snr_min") s.snr_min = values[i];
        if (sweep_mode == "static") {
          const haps::GridSpec grid = default_grid(s, nx, ny, z_step);
          const haps::StaticDesign d = haps::solve_static(s, grid, 1);
          feas[i] = d.feasible;
          obj[i] = d.objective;
          iters[i] = static_cast<int>(d.trace.rows.size());
        } else {
          const haps::DynamicDesign d = haps::solve_dynamic(s, 1e-3, c.max_iter, 1);
          feas[i] = d.feasible;
          obj[i] = d.objective;
          iters[i] = static_cast<int>(d.outer_objectives.size());
        }
      });
      std::string csv =
          haps::csv_row({"parameter", "value", "feasible", "objective", "iterations"});
      for (int i = 0; i < n; ++i)
        csv += haps::csv_row({param, std::to_string(values[i]),
                              feas[i] ? "1" : "0", std::to_string(obj[i]),
                              std::to_string(iters[i])});
      std::cout << csv;
      emit(c, "sweep.csv", csv);
      return kExitOk;
    }

    if (report->parsed()) {
      if (c.out_dir.empty() || !fs::is_directory(c.out_dir)) {
        std::cerr << "report needs --out pointing at an existing run directory\n";
        return kExitUsage;
      }
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(c.out_dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() > 12 &&
            name.substr(name.size() - 12) == ".result.json")
          files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      std::string csv = haps::csv_row({"name", "feasible", "objective"});
      for (const auto& f : files) {
        const json j = json::parse(slurp(f.string()));
        std::string name = f.filename().string();
        name = name.substr(0, name.size() - 12);
        const bool feas = j.value("feasible", j.value("valid", false));
        const double o = j.value("objective", 0.0);
        csv += haps::csv_row({name, feas ? "1" : "0", std::to_string(o)});
      }
      std::cout << csv;
      emit(c, "report.csv", csv);
      return kExitOk;
    }
  } catch (const haps::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const haps::ValidationError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  return kExitUsage;
}
