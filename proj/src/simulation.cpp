#include "layercon/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace layercon {

RunResult run(const DarcyModel& model, FlowState initial, const StepperConfig& config, double t_end,
              const RunSchedule& schedule, const RunHooks& hooks) {
  config.validate();
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("run: T_end must be non-negative");
  if (schedule.sample_every < 1) throw ConfigError("run: sample cadence must be >= 1");

  RunResult out;
  auto record = [&](const FlowState& s, double residual) {
    DiagnosticsRecord r = measure(s, model);
    r.energy_residual = residual;
    if (hooks.on_record) hooks.on_record(s, r);
    out.records.push_back(std::move(r));
  };

  FlowState s = std::move(initial);
  record(s, 0.0);
  EnergyTerms before = model.energy_terms(s);
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  bool recorded_last = true;
  double last_residual = 0.0;
  while (t_end - s.t > eps) {
    StepperConfig cfg = config;
    cfg.dt = std::min(config.dt, t_end - s.t);
    FlowState next = model.step(s, cfg);
    if (t_end - next.t <= eps) next.t = t_end;
    const EnergyTerms after = model.energy_terms(next);
    const double r = energy_residual(before, after, next.dt);
    out.max_energy_residual = std::max(out.max_energy_residual, std::abs(r));
    if (next.cfl_exceeded) ++out.cfl_warnings;
    before = after;
    last_residual = r;
    s = std::move(next);
    if (hooks.on_step) hooks.on_step(s, r);
    recorded_last = s.step % schedule.sample_every == 0;
    if (recorded_last) record(s, r);
    if (schedule.checkpoint_every > 0 && s.step % schedule.checkpoint_every == 0 && hooks.on_checkpoint) {
      hooks.on_checkpoint(s);
    }
  }
  if (!recorded_last) record(s, last_residual);
  out.final_state = std::move(s);
  return out;
}

}  // namespace layercon
