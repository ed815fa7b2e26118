#include "expstab/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "expstab/stability.hpp"

namespace expstab {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

std::string angle_label(double rho) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", rho);
  return buf;
}

std::vector<Modification> run_modifications(const ExperimentConfig& c) {
  std::vector<Modification> mods;
  if (c.unmodified) mods.push_back(Modification::none());
  mods.insert(mods.end(), c.modifications.begin(), c.modifications.end());
  if (mods.empty()) throw ConfigError("no runs: unmodified = false and no modification given");
  return mods;
}

ReferenceKey reference_key(const ExperimentConfig& c, std::size_t samples, std::size_t sample_base) {
  ReferenceKey key;
  key.problem = c.problem;
  key.nx = c.nx;
  key.t_end = c.t_end;
  key.samples = samples;
  key.sample_base = samples ? sample_base : 0;
  key.method = c.reference->method;
  key.modification = c.reference->modification.describe();
  key.steps = reference_steps(c);
  return key;
}

std::vector<SpectrumSnapshot> obtain_reference(const ExperimentConfig& c, const SpectralProblem& sp,
                                               const ReferenceKey& key, const ReferenceCache& cache,
                                               std::ostream& log) {
  bool hit = false;
  log << "reference: " << key.canonical() << '\n';
  auto snaps = build_reference(sp, key, c.reference->modification, cache, &hit);
  log << "reference: " << (hit ? "cache hit " : "computed and stored ") << cache.path_for(key).string() << '\n';
  return snaps;
}

// Longest run of ok records at the fine end of the step list.
std::vector<RunRecord> stable_tail(std::vector<RunRecord> group) {
  std::sort(group.begin(), group.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.n_steps < b.n_steps; });
  std::vector<RunRecord> tail;
  for (auto it = group.rbegin(); it != group.rend() && it->status == RunStatus::ok; ++it) tail.push_back(*it);
  std::reverse(tail.begin(), tail.end());
  return tail;
}

}  // namespace

int cmd_stability(const ExperimentConfig& c, std::ostream& log) {
  const auto& s = c.stability;
  fs::create_directories(c.out);
  const GridAxis k1{s.k1_max / static_cast<double>(s.k1_count), s.k1_max, s.k1_count};

  std::ostringstream summary;
  summary << "method,rho,k1_max,k2_max,unstable_fraction,max_absR,axis_stable,min_unstable_k2,file\n";
  auto emit = [&](MethodFamily family, double rho, double k2_max) {
    const MethodSpec spec = MethodSpec::make(family);
    const GridAxis k2{0.0, k2_max, s.k2_count};
    const StabilityGrid grid = region_grid(spec, k1, k2, RepartitionAngle::from_rho(rho), c.workers);
    const std::string file =
        "stability_" + std::string(method_name(family)) + "_rho_" + angle_label(rho) + ".csv";
    std::ostringstream os;
    write_grid_csv(os, grid);
    write_text(c.out / file, os.str());

    bool axis_stable = true;
    double min_unstable_k2 = -1.0;
    for (std::size_t i = 0; i < grid.k1.size(); ++i) {
      if (grid.class_at(i, 0) != StabilityClass::stable) axis_stable = false;
      for (std::size_t j = 1; j < grid.k2.size(); ++j)
        if (grid.abs_r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 1.0 + kStableTolerance &&
            (min_unstable_k2 < 0.0 || grid.k2[j] < min_unstable_k2))
          min_unstable_k2 = grid.k2[j];
    }
    summary << method_name(family) << ',' << format_number(rho) << ',' << format_number(s.k1_max) << ','
            << format_number(k2_max) << ',' << format_number(grid.unstable_fraction()) << ','
            << format_number(grid.abs_r.maxCoeff()) << ',' << (axis_stable ? "true" : "false") << ','
            << (min_unstable_k2 < 0.0 ? std::string() : format_number(min_unstable_k2)) << ',' << file << '\n';
    log << method_name(family) << " rho=" << angle_label(rho) << ": unstable fraction "
        << grid.unstable_fraction() << ", k2=0 row " << (axis_stable ? "stable" : "not stable") << '\n';
  };

  for (MethodFamily m : s.methods)
    for (double rho : s.rhos) emit(m, rho, s.k2_max.value_or(default_k2_extent(m)));

  if (s.imex_sweep) {
    const double pi = std::numbers::pi;
    for (double rho : {0.0, pi / 256, pi / 128, pi / 64})
      emit(MethodFamily::IMRK4, rho, s.k2_max.value_or(default_k2_extent(MethodFamily::IMRK4)));
  }
  write_text(c.out / "stability_summary.csv", summary.str());

  if (s.split_scan) {
    std::ostringstream splits;
    splits << "method,critical_rho,critical_rho_over_pi\n";
    for (MethodFamily m : s.methods) {
      if (!is_exponential(m)) continue;
      const double rho = critical_split_angle(MethodSpec::make(m), k1, s.split_step, 0.49 * std::numbers::pi);
      splits << method_name(m) << ',';
      if (rho >= 0.0)
        splits << format_number(rho) << ',' << format_number(rho / std::numbers::pi);
      else
        splits << ',';
      splits << '\n';
      log << method_name(m) << " critical split angle: " << (rho >= 0.0 ? angle_label(rho) : "none found")
          << '\n';
    }
    write_text(c.out / "split_angles.csv", splits.str());
  }
  return kExitOk;
}

int cmd_converge(const ExperimentConfig& c, const ReferenceCache& cache, std::ostream& log) {
  const SpectralProblem sp = build_problem(c.problem, c.nx);
  const auto snaps = obtain_reference(c, sp, reference_key(c, 0, 0), cache, log);
  const ComplexVector<>& reference = snaps.front().values;

  std::vector<RunPlan> plans;
  for (MethodFamily m : c.methods)
    for (const auto& mod : run_modifications(c))
      for (std::size_t n : c.steps) plans.push_back({m, mod, n});
  const auto records = run_convergence(sp, reference, c.t_end, plans, c.workers);

  fs::create_directories(c.out);
  std::ostringstream csv;
  write_convergence_csv(csv, records);
  write_text(c.out / ("converge_" + c.problem + ".csv"), csv.str());

  std::ostringstream summary;
  summary << "method,modification,ok_runs,fitted_order,tail_runs,tail_fitted_order\n";
  std::vector<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) {
    const std::pair<std::string, std::string> id{r.method, r.modification};
    if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
    seen.push_back(id);
    std::vector<RunRecord> group;
    for (const auto& q : records)
      if (q.method == r.method && q.modification == r.modification) group.push_back(q);
    const auto ok = std::count_if(group.begin(), group.end(),
                                  [](const RunRecord& q) { return q.status == RunStatus::ok; });
    const auto tail = stable_tail(group);
    const auto all_fit = fitted_order(group);
    const auto tail_fit = fitted_order(tail);
    summary << r.method << ',' << r.modification << ',' << ok << ','
            << (all_fit ? format_number(*all_fit) : std::string()) << ',' << tail.size() << ','
            << (tail_fit ? format_number(*tail_fit) : std::string()) << '\n';
    log << r.method << " [" << r.modification << "]: " << ok << '/' << group.size() << " ok";
    if (tail_fit) log << ", tail order " << *tail_fit;
    log << '\n';
  }
  write_text(c.out / ("converge_" + c.problem + "_summary.csv"), summary.str());

  const bool all_blew_up = std::all_of(records.begin(), records.end(),
                                       [](const RunRecord& r) { return r.status == RunStatus::blowup; });
  return all_blew_up ? kExitAllBlewUp : kExitOk;
}

int cmd_longtime(const ExperimentConfig& c, const ReferenceCache& cache, std::ostream& log) {
  const SpectralProblem sp = build_problem(c.problem, c.nx);
  const std::size_t n = c.steps.front();
  const auto snaps = obtain_reference(c, sp, reference_key(c, c.samples, n), cache, log);
  std::vector<ComplexVector<>> references;
  for (const auto& s : snaps) references.push_back(s.values);

  std::vector<LongtimePlan> plans;
  for (MethodFamily m : c.methods)
    for (const auto& mod : run_modifications(c)) plans.push_back({m, mod});
  const auto series = run_longtime(sp, references, c.t_end, n, plans, c.workers);

  fs::create_directories(c.out);
  std::ostringstream csv, summary;
  write_longtime_csv(csv, series);
  write_longtime_summary_csv(summary, series);
  write_text(c.out / ("longtime_" + c.problem + ".csv"), csv.str());
  write_text(c.out / ("longtime_" + c.problem + "_summary.csv"), summary.str());
  for (const auto& s : series) {
    const auto ex = s.first_exceedance(kNonconvergedThreshold);
    log << s.method << " [" << s.modification << "]: max error " << s.max_error_until(c.t_end);
    if (ex) log << ", exceeds " << kNonconvergedThreshold << " at t=" << *ex;
    if (s.blowup_time) log << ", blowup near t=" << *s.blowup_time;
    log << '\n';
  }
  const bool all_blew_up =
      std::all_of(series.begin(), series.end(), [](const LongtimeSeries& s) { return s.blowup_time.has_value(); });
  return all_blew_up ? kExitAllBlewUp : kExitOk;
}

int cmd_solve(const ExperimentConfig& c, std::ostream& log) {
  const SpectralProblem sp = build_problem(c.problem, c.nx);
  const MethodFamily method = c.methods.front();
  const std::size_t n = c.steps.front();
  const Modification mod = c.modifications.empty() ? Modification::none() : c.modifications.front();
  std::vector<std::size_t> samples;
  if (c.snapshots > 0) samples = sample_step_indices(n, c.snapshots);
  const auto result = run_integration(sp, method, mod, c.t_end, n, samples);

  fs::create_directories(c.out);
  const std::string stem = "solve_" + c.problem + "_" + std::string(method_name(method)) + "_" + std::to_string(n);
  auto write = [&](const std::string& name, double t, const ComplexVector<>& y, bool blowup) {
    SpectrumSnapshot snap;
    snap.problem = c.problem;
    snap.nx = c.nx;
    snap.t = t;
    snap.values = y;
    if (blowup) snap.blowup_step = result.blowup_step;
    std::ostringstream os;
    write_snapshot(os, snap);
    write_text(c.out / name, os.str());
  };
  for (std::size_t i = 0; i < result.samples.size(); ++i)
    write(stem + "_sample" + std::to_string(i + 1) + ".spec", result.samples[i].t, result.samples[i].y, false);
  write(stem + ".spec", result.t, result.y, result.diverged());
  log << method_name(method) << " [" << mod.describe() << "] " << n << " steps: ";
  if (result.diverged())
    log << "blowup at step " << *result.blowup_step << ", last finite t=" << result.t << '\n';
  else
    log << "finished at t=" << result.t << '\n';
  return result.diverged() ? kExitAllBlewUp : kExitOk;
}

int cmd_reference(const ExperimentConfig& c, const ReferenceCache& cache, std::ostream& log) {
  const SpectralProblem sp = build_problem(c.problem, c.nx);
  const std::size_t base = c.steps.empty() ? 0 : c.steps.back();
  obtain_reference(c, sp, reference_key(c, c.samples, base), cache, log);
  return kExitOk;
}

int run_command(ExperimentConfig config, const ReferenceCache& cache, std::ostream& log) {
  try {
    finalize_config(config);
    if (config.command == "stability") return cmd_stability(config, log);
    if (config.command == "converge") return cmd_converge(config, cache, log);
    if (config.command == "longtime") return cmd_longtime(config, cache, log);
    if (config.command == "solve") return cmd_solve(config, log);
    return cmd_reference(config, cache, log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ReferenceError& e) {
    log << "reference failure: " << e.what() << '\n';
    return kExitReference;
  }
}

}  // namespace expstab
