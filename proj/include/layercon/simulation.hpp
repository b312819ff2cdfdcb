#pragma once

#include <functional>
#include <vector>

#include "layercon/darcy_transport.hpp"
#include "layercon/diagnostics.hpp"

namespace layercon {

struct RunSchedule {
  long sample_every = 1;      // steps between records (the first and last state are always recorded)
  long checkpoint_every = 0;  // steps between checkpoints; 0 disables
};

struct RunHooks {
  std::function<void(const FlowState&, const DiagnosticsRecord&)> on_record;
  std::function<void(const FlowState&)> on_checkpoint;
  /// Called after every step with the step's energy-law residual.
  std::function<void(const FlowState&, double)> on_step;
};

struct RunResult {
  FlowState final_state;
  std::vector<DiagnosticsRecord> records;
  double max_energy_residual = 0.0;
  long cfl_warnings = 0;
};

/// Steps from the initial state until t reaches t_end (absolute time, so a
/// restarted run ends where the uninterrupted one does). The last step is
/// shortened to land on t_end. Deterministic for a given input.
RunResult run(const DarcyModel& model, FlowState initial, const StepperConfig& config, double t_end,
              const RunSchedule& schedule = {}, const RunHooks& hooks = {});

}  // namespace layercon
