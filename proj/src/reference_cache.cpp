#include "expstab/reference_cache.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace expstab {

namespace {

constexpr std::string_view kKeyPrefix = "# expstab-reference ";

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  return out;
}

}  // namespace

std::string ReferenceKey::canonical() const {
  std::ostringstream os;
  os << "problem=" << problem << " Nx=" << nx << " t_end=" << format_number(t_end)
     << " samples=" << samples << " sample_base=" << sample_base << " method=" << method_name(method)
     << " modification=" << modification << " steps=" << steps;
  return os.str();
}

std::string ReferenceKey::file_name() const {
  // Readable prefix plus a hash of the full key to keep names unique.
  const std::size_t digest = std::hash<std::string>{}(canonical());
  std::ostringstream os;
  os << sanitize(problem) << "_Nx" << nx << "_t" << sanitize(format_number(t_end)) << "_s" << samples
     << '_' << method_name(method) << '_' << steps << '_' << std::hex << digest << ".ref";
  return os.str();
}

std::vector<std::size_t> ReferenceKey::sample_steps() const {
  if (samples == 0) return {};
  const std::size_t base = sample_base == 0 ? steps : sample_base;
  if (base == 0 || steps % base != 0)
    throw ReferenceError("reference steps must be a multiple of the sample base");
  auto out = sample_step_indices(base, samples);
  for (auto& s : out) s *= steps / base;
  return out;
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("EXPSTAB_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
    return std::filesystem::path(xdg) / "expstab";
  if (const char* home = std::getenv("HOME"); home && *home)
    return std::filesystem::path(home) / ".cache" / "expstab";
  return ".expstab-cache";
}

ReferenceCache::ReferenceCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ReferenceCache::path_for(const ReferenceKey& key) const {
  return dir_ / key.file_name();
}

std::optional<std::vector<SpectrumSnapshot>> ReferenceCache::load(const ReferenceKey& key) const {
  std::ifstream is(path_for(key), std::ios::binary);
  if (!is) return std::nullopt;
  std::string first;
  if (!std::getline(is, first) || first != std::string(kKeyPrefix) + key.canonical()) return std::nullopt;
  try {
    auto snaps = read_snapshots(is);
    const std::size_t expected = key.samples == 0 ? 1 : key.samples;
    if (snaps.size() != expected) return std::nullopt;
    return snaps;
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

void ReferenceCache::store(const ReferenceKey& key, const std::vector<SpectrumSnapshot>& snapshots) const {
  std::ostringstream os;
  os << kKeyPrefix << key.canonical() << '\n';
  for (const auto& s : snapshots) write_snapshot(os, s);
  write_file_atomic(path_for(key), os.str());
}

std::vector<SpectrumSnapshot> compute_reference(const SpectralProblem& sp, const ReferenceKey& key,
                                                const Modification& modification) {
  const std::vector<std::size_t> steps = key.sample_steps();
  IntegrationResult<> result;
  try {
    result = run_integration(sp, key.method, modification, key.t_end, key.steps, steps);
  } catch (const std::invalid_argument& e) {
    throw ReferenceError(std::string("reference: ") + e.what());
  }
  if (result.diverged())
    throw ReferenceError("reference run diverged at step " + std::to_string(*result.blowup_step) + " (" +
                         key.canonical() + ")");
  std::vector<SpectrumSnapshot> out;
  auto make = [&](double t, const ComplexVector<>& y) {
    SpectrumSnapshot s;
    s.problem = key.problem;
    s.nx = key.nx;
    s.t = t;
    s.values = y;
    return s;
  };
  if (key.samples == 0) {
    out.push_back(make(result.t, result.y));
  } else {
    for (const auto& smp : result.samples) out.push_back(make(smp.t, smp.y));
  }
  return out;
}

std::vector<SpectrumSnapshot> build_reference(const SpectralProblem& sp, const ReferenceKey& key,
                                              const Modification& modification,
                                              const ReferenceCache& cache, bool* hit) {
  if (auto cached = cache.load(key)) {
    if (hit) *hit = true;
    return *cached;
  }
  if (hit) *hit = false;
  auto snaps = compute_reference(sp, key, modification);
  cache.store(key, snaps);
  return snaps;
}

}  // namespace expstab
