#pragma once

#include <iosfwd>

#include "expstab/config.hpp"
#include "expstab/reference_cache.hpp"

namespace expstab {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitReference = 3,
  kExitAllBlewUp = 4,
};

/// Stability grids, the IMEX repartition sweep and the split-angle scan.
int cmd_stability(const ExperimentConfig& config, std::ostream& log);
/// Convergence study against a cached final-time reference.
int cmd_converge(const ExperimentConfig& config, const ReferenceCache& cache, std::ostream& log);
/// Error against cached references at equispaced sample times.
int cmd_longtime(const ExperimentConfig& config, const ReferenceCache& cache, std::ostream& log);
/// One integration with spectrum snapshots.
int cmd_solve(const ExperimentConfig& config, std::ostream& log);
/// Builds (or finds) the reference for the configured problem.
int cmd_reference(const ExperimentConfig& config, const ReferenceCache& cache, std::ostream& log);

/// Dispatches on config.command; maps ConfigError and ReferenceError to
/// their exit codes.
int run_command(ExperimentConfig config, const ReferenceCache& cache, std::ostream& log);

}  // namespace expstab
