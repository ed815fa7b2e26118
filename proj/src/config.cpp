#include "expstab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace expstab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(item));
      item.clear();
    } else {
      item += c;
    }
  }
  out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError("invalid " + what + " '" + text + "'");
  return v;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError("invalid " + what + " '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("invalid " + what + " '" + text + "'");
}

const std::set<std::string> kListKeys{"methods", "steps", "rhos"};
const std::set<std::string> kModificationKeys{"repartition", "hyperviscosity"};

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "problem") {
    c.problem = trim(value);
  } else if (key == "nx") {
    c.nx = parse_count(value, "nx");
  } else if (key == "t_end") {
    c.t_end = parse_real(value, "t_end");
  } else if (key == "methods" || key == "method") {
    for (const auto& m : split(value, ',')) c.methods.push_back(parse_method_name(m));
  } else if (key == "steps") {
    for (const auto& s : split(value, ',')) c.steps.push_back(parse_count(s, "step count"));
  } else if (key == "repartition") {
    c.modifications.push_back(Modification::with(parse_repartition(value)));
  } else if (key == "hyperviscosity") {
    c.modifications.push_back(Modification::with(parse_hyperviscosity(value)));
  } else if (key == "unmodified") {
    c.unmodified = parse_bool(value, "unmodified");
  } else if (key == "out") {
    c.out = trim(value);
  } else if (key == "reference_method") {
    if (!c.reference) c.reference = ReferenceSettings{};
    c.reference->method = parse_method_name(value);
    c.reference->method_given = true;
  } else if (key == "reference_repartition") {
    if (!c.reference) c.reference = ReferenceSettings{};
    const std::string v = trim(value);
    c.reference->modification =
        v == "none" ? Modification::none() : Modification::with(parse_repartition(v));
    c.reference->modification_given = true;
  } else if (key == "reference_steps") {
    if (!c.reference) c.reference = ReferenceSettings{};
    c.reference->steps = parse_count(value, "reference_steps");
  } else if (key == "samples") {
    c.samples = parse_count(value, "samples");
  } else if (key == "snapshots") {
    c.snapshots = parse_count(value, "snapshots");
  } else if (key == "workers") {
    c.workers = static_cast<unsigned>(parse_count(value, "workers"));
  } else if (key == "rhos") {
    for (const auto& r : split(value, ',')) c.stability.rhos.push_back(parse_angle(r));
  } else if (key == "k1_max") {
    c.stability.k1_max = parse_real(value, "k1_max");
  } else if (key == "k1_count") {
    c.stability.k1_count = parse_count(value, "k1_count");
  } else if (key == "k2_count") {
    c.stability.k2_count = parse_count(value, "k2_count");
  } else if (key == "k2_max") {
    c.stability.k2_max = parse_real(value, "k2_max");
  } else if (key == "imex_sweep") {
    c.stability.imex_sweep = parse_bool(value, "imex_sweep");
  } else if (key == "split_scan") {
    c.stability.split_scan = parse_bool(value, "split_scan");
  } else if (key == "split_step") {
    c.stability.split_step = parse_angle(value);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

}  // namespace

double parse_angle(const std::string& text) {
  std::string t = trim(text);
  const auto pi_pos = t.find("pi");
  if (pi_pos == std::string::npos) return parse_real(t, "angle");
  double numerator = 1.0;
  std::string head = trim(t.substr(0, pi_pos));
  if (!head.empty() && head.back() == '*') head.pop_back();
  if (!head.empty()) numerator = parse_real(head, "angle");
  std::string tail = trim(t.substr(pi_pos + 2));
  double denominator = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError("invalid angle '" + text + "'");
    denominator = parse_real(tail.substr(1), "angle");
    if (denominator == 0.0) throw ConfigError("invalid angle '" + text + "'");
  }
  return numerator * std::numbers::pi / denominator;
}

RepartitionSpec parse_repartition(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("repartition must be kind:param, got '" + text + "'");
  RepartitionKind kind;
  try {
    kind = parse_repartition_kind(trim(text.substr(0, colon)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::string param = trim(text.substr(colon + 1));
  RepartitionSpec spec;
  spec.kind = kind;
  if (param.rfind("eps=", 0) == 0 || kind == RepartitionKind::identity) {
    const double eps = parse_real(param.rfind("eps=", 0) == 0 ? param.substr(4) : param, "epsilon");
    if (eps < 0.0) throw ConfigError("repartition epsilon must be >= 0");
    spec.epsilon = eps;
    return spec;
  }
  const double rho = parse_angle(param);
  if (!(rho >= 0.0) || !(rho < std::numbers::pi / 2)) throw ConfigError("repartition rho must lie in [0, pi/2)");
  spec.rho = rho;
  return spec;
}

HyperviscositySpec parse_hyperviscosity(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() < 2 || parts.size() > 3)
    throw ConfigError("hyperviscosity must be m:gamma[:q], got '" + text + "'");
  HyperviscositySpec spec;
  spec.m = static_cast<int>(parse_count(parts[0], "hyperviscosity order"));
  spec.gamma = parse_real(parts[1], "hyperviscosity gamma");
  if (parts.size() == 3) spec.q = static_cast<int>(parse_count(parts[2], "hyperviscosity q"));
  if (spec.m < 2 || spec.m % 2 != 0) throw ConfigError("hyperviscosity order must be even and >= 2");
  if (spec.gamma < 0.0) throw ConfigError("hyperviscosity gamma must be >= 0");
  if (spec.q < 1) throw ConfigError("hyperviscosity q must be >= 1");
  return spec;
}

MethodFamily parse_method_name(const std::string& text) {
  try {
    return parse_method(trim(text));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<Setting> read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::vector<Setting> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig make_config(const std::string& command, const std::vector<Setting>& file,
                             const std::vector<Setting>& overrides) {
  ExperimentConfig c;
  c.command = command;
  for (const auto& [k, v] : file) apply(c, k, v);
  std::set<std::string> cleared;
  for (const auto& [k, v] : overrides) {
    const std::string key = k == "method" ? "methods" : k;
    if (kListKeys.count(key) && !cleared.count(key)) {
      if (key == "methods") c.methods.clear();
      if (key == "steps") c.steps.clear();
      if (key == "rhos") c.stability.rhos.clear();
      cleared.insert(key);
    }
    if (kModificationKeys.count(key) && !cleared.count("modifications")) {
      c.modifications.clear();
      cleared.insert("modifications");
    }
    apply(c, key, v);
  }
  return c;
}

void finalize_config(ExperimentConfig& c) {
  const std::string& cmd = c.command;
  if (cmd != "stability" && cmd != "converge" && cmd != "longtime" && cmd != "solve" && cmd != "reference")
    throw ConfigError("unknown command '" + cmd + "'");

  if (cmd == "stability") {
    auto& s = c.stability;
    if (s.methods.empty()) s.methods = c.methods;
    if (s.methods.empty()) s.methods = {MethodFamily::ERK4, MethodFamily::ESDC6, MethodFamily::EPBM5};
    for (auto m : s.methods)
      if (m != MethodFamily::ERK4 && m != MethodFamily::ESDC6 && m != MethodFamily::EPBM5 &&
          m != MethodFamily::IMRK4 && m != MethodFamily::RK4 && m != MethodFamily::ExpEuler)
        throw ConfigError("unsupported stability method");
    if (s.rhos.empty()) s.rhos = {0.0, std::numbers::pi / 2048};
    for (double r : s.rhos)
      if (!(r >= 0.0) || !(r < std::numbers::pi / 2)) throw ConfigError("rho must lie in [0, pi/2)");
    if (!(s.k1_max > 0.0)) throw ConfigError("k1_max must be positive");
    if (s.k1_count < 2 || s.k2_count < 2) throw ConfigError("grid counts must be >= 2");
    if (s.k2_max && !(*s.k2_max > 0.0)) throw ConfigError("k2_max must be positive");
    if (s.split_step == 0.0) s.split_step = std::numbers::pi / 256;
    if (!(s.split_step > 0.0)) throw ConfigError("split_step must be positive");
    return;
  }

  if (c.problem.empty()) c.problem = cmd == "longtime" ? "kdv" : "zds";
  if (c.problem != "zds" && c.problem != "kdv") throw ConfigError("unknown problem '" + c.problem + "'");
  const bool zds = c.problem == "zds";
  if (c.nx == 0) c.nx = zds ? 128 : 512;
  if (c.nx < 32 || (c.nx & (c.nx - 1)) != 0) throw ConfigError("nx must be a power of two >= 32");
  if (c.t_end == 0.0) c.t_end = zds ? 40.0 : 160.0;
  if (!(c.t_end > 0.0)) throw ConfigError("t_end must be positive");

  if (c.methods.empty()) {
    if (cmd == "converge")
      c.methods = {MethodFamily::ERK4, MethodFamily::ESDC6, MethodFamily::EPBM5, MethodFamily::IMRK4,
                   MethodFamily::RK4};
    else if (cmd == "longtime")
      c.methods = {MethodFamily::ERK4, MethodFamily::ESDC6, MethodFamily::EPBM5};
    else if (cmd == "solve")
      c.methods = {MethodFamily::ERK4};
  }
  if (cmd == "solve" && c.methods.size() != 1) throw ConfigError("solve takes exactly one method");

  if (c.steps.empty()) {
    // `reference` defaults to the grid of the command that consumes it.
    if (cmd == "converge" || (cmd == "reference" && zds))
      c.steps = {500, 1000, 2000, 4000, 8000, 16000, 32000};
    else if (cmd == "longtime" || cmd == "reference")
      c.steps = {56000};
    else if (cmd == "solve")
      c.steps = {2000};
  }
  for (std::size_t n : c.steps)
    if (n == 0) throw ConfigError("step counts must be positive");
  for (std::size_t i = 1; i < c.steps.size(); ++i)
    if (c.steps[i] <= c.steps[i - 1]) throw ConfigError("step counts must be strictly increasing");
  if ((cmd == "longtime" || cmd == "solve") && c.steps.size() != 1)
    throw ConfigError(cmd + " takes exactly one step count");

  if (cmd == "longtime" && c.modifications.empty()) {
    c.modifications = {
        Modification::with(RepartitionSpec::angle(RepartitionKind::abs_k3, std::numbers::pi / 64)),
        Modification::with(RepartitionSpec::angle(RepartitionKind::k2, std::numbers::pi / 3)),
        Modification::with(RepartitionSpec::identity(16.0))};
  }
  if (cmd == "solve" && c.modifications.size() > 1) throw ConfigError("solve takes at most one modification");

  if (c.samples == 0 && cmd == "longtime") c.samples = 30;
  if (c.samples == 0 && cmd == "reference" && !zds) c.samples = 30;
  if (cmd == "longtime" && c.samples > c.steps.front()) throw ConfigError("more samples than steps");

  if (!c.reference) c.reference = ReferenceSettings{};
  ReferenceSettings& r = *c.reference;
  if (!r.method_given) r.method = zds ? MethodFamily::RK4 : MethodFamily::ERK4;
  if (!r.modification_given)
    r.modification = zds ? Modification::none()
                         : Modification::with(RepartitionSpec::angle(RepartitionKind::abs_k3,
                                                                     std::numbers::pi / 64));
  if (cmd == "converge" || cmd == "longtime" || cmd == "reference") {
    const std::size_t largest = c.steps.back();
    const std::size_t ref = reference_steps(c);
    if (ref < 10 * largest) throw ConfigError("reference steps must be at least 10x the largest step count");
    if (c.samples > 0 && ref % c.steps.back() != 0)
      throw ConfigError("reference steps must be a multiple of the step count");
  }
}

std::size_t reference_steps(const ExperimentConfig& c) {
  if (c.reference && c.reference->steps > 0) return c.reference->steps;
  const std::size_t largest = c.steps.empty() ? 0 : c.steps.back();
  const std::size_t floor = c.problem == "kdv" ? 560000 : 200000;
  return std::max(floor, 10 * largest);
}

}  // namespace expstab
