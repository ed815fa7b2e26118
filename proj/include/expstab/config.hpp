#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expstab/experiment.hpp"
#include "expstab/methods.hpp"
#include "expstab/spectral.hpp"

namespace expstab {

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StabilitySettings {
  std::vector<MethodFamily> methods;
  std::vector<double> rhos;
  double k1_max = 60.0;
  std::size_t k1_count = 600;
  std::size_t k2_count = 200;
  /// Overrides the per-method default band.
  std::optional<double> k2_max;
  bool imex_sweep = true;
  bool split_scan = true;
  double split_step = 0.0;
};

struct ReferenceSettings {
  MethodFamily method = MethodFamily::RK4;
  Modification modification;
  /// 0 selects max(floor, 10 × largest step count).
  std::size_t steps = 0;
  /// Unset fields take the per-problem default.
  bool method_given = false;
  bool modification_given = false;
};

struct ExperimentConfig {
  std::string command;
  std::string problem;
  std::size_t nx = 0;
  double t_end = 0.0;
  std::vector<MethodFamily> methods;
  std::vector<std::size_t> steps;
  std::vector<Modification> modifications;
  /// Run each method without modification as well.
  bool unmodified = true;
  std::filesystem::path out = "expstab-out";
  std::optional<ReferenceSettings> reference;
  /// Sample times for long-time runs and reference files; 0 = final only.
  std::size_t samples = 0;
  /// Intermediate snapshots written by `solve`.
  std::size_t snapshots = 0;
  unsigned workers = 0;
  StabilitySettings stability;
};

/// Number, "pi", "pi/N", "M*pi/N" or "Mpi/N".
double parse_angle(const std::string& text);
/// "abs_k3:pi/128", "k2:pi/3", "identity:8", "<kind>:eps=<value>".
RepartitionSpec parse_repartition(const std::string& text);
/// "m:gamma" or "m:gamma:q".
HyperviscositySpec parse_hyperviscosity(const std::string& text);
/// Method name, raising ConfigError when unknown.
MethodFamily parse_method_name(const std::string& text);

using Setting = std::pair<std::string, std::string>;

/// Reads `key = value` lines; '#' starts a comment.
std::vector<Setting> read_config_file(const std::filesystem::path& path);

/// Applies file settings, then overrides. A list key given as an override
/// replaces the file's list; repartition and hyperviscosity share one list.
ExperimentConfig make_config(const std::string& command, const std::vector<Setting>& file,
                             const std::vector<Setting>& overrides);

/// Fills per-command and per-problem defaults and validates.
void finalize_config(ExperimentConfig& config);

/// Reference steps actually used for a configuration.
std::size_t reference_steps(const ExperimentConfig& config);

}  // namespace expstab
