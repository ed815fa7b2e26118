#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "expstab/experiment.hpp"
#include "expstab/spectrum_io.hpp"

namespace expstab {

/// Reference integration failed; maps to exit code 3.
class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReferenceKey {
  std::string problem;
  std::size_t nx = 0;
  double t_end = 0.0;
  /// 0 for the final state only.
  std::size_t samples = 0;
  /// Sample i sits at reference step round(i·base/samples)·(steps/base), so
  /// it coincides with sample i of a run using `base` steps. 0 means steps.
  std::size_t sample_base = 0;
  MethodFamily method = MethodFamily::RK4;
  std::string modification = "none";
  std::size_t steps = 0;

  /// Canonical single-line form stored in the cache file.
  std::string canonical() const;
  /// File name derived from the canonical form.
  std::string file_name() const;
  /// Reference step indices of the samples; throws when steps is not a
  /// multiple of the sample base.
  std::vector<std::size_t> sample_steps() const;
};

/// EXPSTAB_CACHE_DIR, else $XDG_CACHE_HOME/expstab, else $HOME/.cache/expstab,
/// else ./.expstab-cache.
std::filesystem::path default_cache_dir();

/// Directory of reference spectra. Entries are published by rename, so a
/// reader sees either a complete entry or none.
class ReferenceCache {
 public:
  explicit ReferenceCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const ReferenceKey& key) const;

  /// nullopt on a miss or when the stored key differs.
  std::optional<std::vector<SpectrumSnapshot>> load(const ReferenceKey& key) const;
  void store(const ReferenceKey& key, const std::vector<SpectrumSnapshot>& snapshots) const;

 private:
  std::filesystem::path dir_;
};

/// Integrates the reference described by `key` (with its modification).
/// Throws ReferenceError when the run diverges.
std::vector<SpectrumSnapshot> compute_reference(const SpectralProblem& sp, const ReferenceKey& key,
                                                const Modification& modification);

/// Cache hit, or compute and store. `hit` reports which happened.
std::vector<SpectrumSnapshot> build_reference(const SpectralProblem& sp, const ReferenceKey& key,
                                              const Modification& modification,
                                              const ReferenceCache& cache, bool* hit = nullptr);

}  // namespace expstab
