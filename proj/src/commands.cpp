#include "layercon/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "layercon/acceptance.hpp"
#include "layercon/diagnostics.hpp"
#include "layercon/output.hpp"
#include "layercon/simulation.hpp"
#include "layercon/text.hpp"

namespace layercon {

namespace fs = std::filesystem;

RunConfig default_config() {
  RunConfig c;
  c.stack.interfaces = {0.0, -0.5, -1.0};
  c.stack.layers = {{1.0, 1.0, 1.0}, {1.0, 1.0, 2.0}};
  c.constants.alpha = 0.0;
  c.boundary = {0.0, 1.0};
  return c;
}

namespace {

std::string numbered(const char* stem, long step, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%08ld.%s", stem, step, ext);
  return buf;
}

RunConfig resolve_config(const CommandOptions& o, bool required) {
  if (o.config.empty()) {
    if (required) throw ConfigError("--config is required for this subcommand");
    RunConfig c = default_config();
    if (!o.out.empty()) c.output.directory = o.out;
    return c;
  }
  RunConfig c = load_config(o.config);
  if (!o.out.empty()) c.output.directory = o.out;
  return c;
}

Simulation build(const RunConfig& c, std::ostream& err) {
  Simulation sim = Simulation::build(c);
  for (const auto& w : sim.warnings) err << "warning: " << w << '\n';
  return sim;
}

void write_vtk_file(const fs::path& path, const FlowState& s, const DarcyModel& model) {
  std::ostringstream o;
  write_vtk(o, s, model);
  write_file(path, o.str());
}

int command_eigen(const CommandOptions& o, std::ostream& log, std::ostream& err) {
  const RunConfig c = resolve_config(o, false);
  const Simulation sim = build(c, err);
  const fs::path dir = c.output.directory;
  std::ostringstream spec, fun;
  write_spectrum_csv(spec, *sim.space);
  write_eigenfunctions_csv(fun, *sim.space, 0);
  write_file(dir / "spectrum.csv", spec.str());
  write_file(dir / "eigenfunctions_m0.csv", fun.str());
  if (!o.quiet) {
    log << "eigen: " << sim.space->modes() << " modes x " << sim.space->kmax() << " eigenpairs, lambda_1 = "
        << format_double(sim.space->basis(0).eigenvalue(0)) << ", written to " << dir.string() << '\n';
  }
  return exit_ok;
}

int command_steady(const CommandOptions& o, std::ostream& log, std::ostream&) {
  const RunConfig c = resolve_config(o, false);
  validate(c);
  const LayerStack stack = build_stack(c.stack);
  const ConductionLift lift(stack, c.boundary);
  std::ostringstream csv;
  write_steady_csv(csv, stack, lift);
  const fs::path path = fs::path(c.output.directory) / "steady.csv";
  write_file(path, csv.str());
  if (!o.quiet) log << "steady: flux " << format_double(lift.flux()) << ", written to " << path.string() << '\n';
  return exit_ok;
}

int command_run(const CommandOptions& o, std::ostream& log, std::ostream& err) {
  const RunConfig c = resolve_config(o, true);
  const Simulation sim = build(c, err);
  const DarcyModel& model = *sim.model;
  const OutputSpec& out = c.output;
  const fs::path dir = out.directory;
  fs::create_directories(dir);
  write_file(dir / "config.resolved", emit_config(sim.config));

  FlowState s0 = o.resume.empty() ? sim.initial_state() : read_checkpoint(o.resume, model);

  std::ofstream csv;
  if (out.csv) {
    csv.open(dir / "timeseries.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write '" + (dir / "timeseries.csv").string() + "'");
    csv << csv_header(sim.stack()) << '\n';
  }
  long last_snapshot = -1, last_checkpoint = -1;
  auto snapshot = [&](const FlowState& s) {
    write_vtk_file(dir / numbered("snapshot", s.step, "vtk"), s, model);
    last_snapshot = s.step;
  };
  auto checkpoint = [&](const FlowState& s) {
    write_checkpoint(dir / numbered("checkpoint", s.step, "chk"), s, model);
    last_checkpoint = s.step;
  };

  RunHooks hooks;
  hooks.on_record = [&](const FlowState&, const DiagnosticsRecord& r) {
    if (out.csv) csv << csv_row(r) << '\n';
    if (!o.quiet) {
      log << "step " << r.step << " t " << format_double(r.t) << " E " << format_double(r.E) << " cfl "
          << format_double(r.cfl) << '\n';
    }
  };
  hooks.on_step = [&](const FlowState& s, double) {
    if (out.vtk && out.snapshot_every > 0 && s.step % out.snapshot_every == 0) snapshot(s);
  };
  if (out.checkpoint) hooks.on_checkpoint = checkpoint;
  RunSchedule sched;
  sched.sample_every = out.cadence;
  sched.checkpoint_every = out.checkpoint ? out.checkpoint_every : 0;

  if (out.vtk) snapshot(s0);
  RunResult res;
  try {
    res = run(model, std::move(s0), c.stepper, c.t_end, sched, hooks);
  } catch (const NumericalError& e) {
    if (e.last_valid) write_checkpoint(dir / "checkpoint_failed.chk", *e.last_valid, model);
    throw;
  }
  if (out.csv) {
    csv.close();
    if (!csv) throw std::runtime_error("write failed for timeseries.csv");
  }
  if (out.vtk && last_snapshot != res.final_state.step) snapshot(res.final_state);
  if (out.checkpoint && last_checkpoint != res.final_state.step) checkpoint(res.final_state);

  nlohmann::json j;
  j["t"] = res.final_state.t;
  j["step"] = res.final_state.step;
  j["records"] = res.records.size();
  j["max_energy_residual"] = res.max_energy_residual;
  j["cfl_warnings"] = res.cfl_warnings;
  j["nq"] = sim.config.resolution.nq;
  if (res.records.size() >= 2) {
    const TrajectoryReport rep = assert_trajectory(res.records, default_policy(res.records[0], c.boundary));
    j["trajectory"] = nlohmann::json::parse(rep.to_json());
  }
  write_file(dir / "summary.json", j.dump(2) + "\n");
  if (res.cfl_warnings > 0) err << "warning: CFL target exceeded on " << res.cfl_warnings << " steps\n";
  if (!o.quiet) log << "run: reached t = " << format_double(res.final_state.t) << " in " << res.final_state.step << " steps\n";
  return exit_ok;
}

int command_verify(const CommandOptions& o, std::ostream& log, std::ostream& err) {
  const RunConfig c = resolve_config(o, true);
  nlohmann::json j;
  j["criteria"] = nlohmann::json::array();
  bool ok = true;
  run_acceptance([&](const CriterionResult& r) {
    ok = ok && r.passed;
    log << format_result(r) << '\n' << std::flush;
    j["criteria"].push_back({{"id", r.id},
                             {"name", r.name},
                             {"passed", r.passed},
                             {"measured", r.measured},
                             {"seconds", r.seconds},
                             {"budget", r.budget}});
  });

  // invariants along the configured trajectory
  const Simulation sim = build(c, err);
  RunSchedule sched;
  sched.sample_every = c.output.cadence;
  const RunResult res = run(*sim.model, sim.initial_state(), c.stepper, c.t_end, sched);
  if (res.records.size() >= 2) {
    const TrajectoryReport rep = assert_trajectory(res.records, default_policy(res.records[0], c.boundary));
    for (const auto& ch : rep.checks) {
      ok = ok && ch.passed;
      log << (ch.passed ? "PASS" : "FAIL") << "  config " << ch.name << ": worst " << format_double(ch.worst)
          << " at t = " << format_double(ch.worst_time) << '\n';
    }
    j["trajectory"] = nlohmann::json::parse(rep.to_json());
  } else {
    log << "SKIP  config trajectory: T_end = 0\n";
  }
  j["passed"] = ok;
  write_file(fs::path(c.output.directory) / "verify.json", j.dump(2) + "\n");
  if (!o.quiet) log << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
  return ok ? exit_ok : exit_verify;
}

}  // namespace

int run_command(const std::string& name, const CommandOptions& options, std::ostream& log, std::ostream& err) {
  try {
    if (!options.resume.empty() && name != "run") throw ConfigError("--resume applies to run only");
    if (name == "eigen") return command_eigen(options, log, err);
    if (name == "steady") return command_steady(options, log, err);
    if (name == "run") return command_run(options, log, err);
    if (name == "verify") return command_verify(options, log, err);
    throw ConfigError("unknown subcommand '" + name + "'");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  }
}

}  // namespace layercon
