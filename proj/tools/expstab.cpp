#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "expstab/commands.hpp"

namespace {

struct CommandLine {
  std::string config_file;
  std::vector<std::string> methods;
  std::string steps;
  std::vector<std::string> repartitions;
  std::vector<std::string> hyperviscosities;
  std::string out;
  std::string problem;
  std::string nx;
  std::string t_end;
  std::string workers;
  std::string samples;
  std::string snapshots;
  std::string reference_steps;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommandLine& cl) {
  sub->add_option("-c,--config", cl.config_file, "key = value configuration file");
  sub->add_option("--method", cl.methods, "method name (repeatable or comma list)");
  sub->add_option("--steps", cl.steps, "comma-separated step counts");
  sub->add_option("--repartition", cl.repartitions, "kind:param, e.g. abs_k3:pi/128 or identity:8");
  sub->add_option("--hyperviscosity", cl.hyperviscosities, "m:gamma[:q]");
  sub->add_option("-o,--out", cl.out, "output directory");
  sub->add_option("--problem", cl.problem, "zds or kdv");
  sub->add_option("--nx", cl.nx, "grid size");
  sub->add_option("--t-end", cl.t_end, "final time");
  sub->add_option("--workers", cl.workers, "worker threads (0 = logical cores)");
  sub->add_option("--samples", cl.samples, "sample times");
  sub->add_option("--snapshots", cl.snapshots, "intermediate snapshots (solve)");
  sub->add_option("--reference-steps", cl.reference_steps, "reference step count");
  sub->add_option("--set", cl.sets, "any config key, as key=value (repeatable)");
}

std::vector<expstab::Setting> overrides(const CommandLine& cl) {
  std::vector<expstab::Setting> out;
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) out.emplace_back(key, v);
  };
  for (const auto& m : cl.methods) out.emplace_back("methods", m);
  put("steps", cl.steps);
  for (const auto& r : cl.repartitions) out.emplace_back("repartition", r);
  for (const auto& h : cl.hyperviscosities) out.emplace_back("hyperviscosity", h);
  put("out", cl.out);
  put("problem", cl.problem);
  put("nx", cl.nx);
  put("t_end", cl.t_end);
  put("workers", cl.workers);
  put("samples", cl.samples);
  put("snapshots", cl.snapshots);
  put("reference_steps", cl.reference_steps);
  for (const auto& s : cl.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw expstab::ConfigError("--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability experiments for partitioned exponential integrators"};
  app.require_subcommand(1);
  CommandLine cl;
  const std::pair<const char*, const char*> commands[] = {
      {"stability", "stability regions, IMEX sweep and split angles"},
      {"converge", "convergence study against a cached reference"},
      {"longtime", "error over time against cached references"},
      {"solve", "single run with spectrum snapshots"},
      {"reference", "build or look up a reference solution"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, cl);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : expstab::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    std::vector<expstab::Setting> file;
    if (!cl.config_file.empty()) file = expstab::read_config_file(cl.config_file);
    expstab::ExperimentConfig config = expstab::make_config(command, file, overrides(cl));
    const expstab::ReferenceCache cache(expstab::default_cache_dir());
    return expstab::run_command(std::move(config), cache, std::cerr);
  } catch (const expstab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return expstab::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
