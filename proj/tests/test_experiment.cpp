#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "expstab/experiment.hpp"
#include "expstab/reference_cache.hpp"
#include "expstab/spectrum_io.hpp"

using namespace expstab;
using cd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("expstab-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunRecord record(const std::string& method, std::size_t n, double h, double err,
                 RunStatus status = RunStatus::ok) {
  RunRecord r;
  r.method = method;
  r.modification = "none";
  r.n_steps = n;
  r.h = h;
  r.relative_error = err;
  r.status = status;
  return r;
}

}  // namespace

TEST_CASE("relative error uses max norms") {
  ComplexVector<> ref(3), y(3);
  ref << cd(3, 4), cd(0, 1), cd(-1, 0);
  y << cd(3, 4), cd(0, 1.5), cd(-1, 0);
  CHECK(relative_error(y, ref) == doctest::Approx(0.1));
  CHECK(relative_error(ref, ref) == 0.0);
  CHECK_THROWS_AS(relative_error(y, ComplexVector<>::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(relative_error(y, ComplexVector<>::Ones(2)), std::invalid_argument);
}

TEST_CASE("observed orders from synthetic power laws") {
  for (double p : {1.0, 4.0, 5.5, 6.0}) {
    std::vector<RunRecord> recs;
    for (std::size_t n : {500, 1000, 2000, 4000}) {
      const double h = 40.0 / static_cast<double>(n);
      recs.push_back(record("M", n, h, 3.7 * std::pow(h, p)));
    }
    assign_observed_orders(recs);
    CHECK_FALSE(recs[0].observed_order);
    for (std::size_t i = 1; i < recs.size(); ++i) CHECK(std::abs(*recs[i].observed_order - p) < 1e-12);
    CHECK(std::abs(*fitted_order(recs) - p) < 1e-12);
  }
  CHECK(observed_order(0.1, 1e-4, 0.05, 6.25e-6) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(observed_order(0.1, 1e-4, 0.1, 1e-5), std::invalid_argument);
}

TEST_CASE("orders skip failed runs and group by method") {
  std::vector<RunRecord> recs{record("A", 1000, 0.04, 0.5, RunStatus::nonconverged),
                              record("A", 2000, 0.02, 1e-6), record("A", 4000, 0.01, 6.25e-8),
                              record("B", 2000, 0.02, std::nan(""), RunStatus::blowup),
                              record("B", 4000, 0.01, 1e-9)};
  assign_observed_orders(recs);
  CHECK_FALSE(recs[1].observed_order);
  CHECK(*recs[2].observed_order == doctest::Approx(4.0));
  CHECK_FALSE(recs[4].observed_order);
  CHECK_FALSE(fitted_order({recs[4]}));
}

TEST_CASE("convergence csv") {
  std::ostringstream os;
  auto r = record("ERK4", 2000, 0.02, 1.5e-7);
  r.observed_order = 4.0;
  write_convergence_csv(os, {r, record("RK4", 500, 0.08, std::nan(""), RunStatus::blowup)});
  const std::string s = os.str();
  CHECK(s.rfind("method,modification,n_steps,h,relative_error,wall_time_seconds,status,observed_order\n", 0) == 0);
  CHECK(s.find("ERK4,none,2000,0.02,1.4999999999999999e-07,0,ok,4\n") != std::string::npos);
  CHECK(s.find("RK4,none,500,0.080000000000000002,nan,0,blowup,\n") != std::string::npos);
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("sample indices") {
  CHECK(sample_step_indices(56000, 30).back() == 56000);
  CHECK(sample_step_indices(56000, 30).front() == 1867);
  CHECK(sample_step_indices(10, 5) == std::vector<std::size_t>{2, 4, 6, 8, 10});
  CHECK_THROWS_AS(sample_step_indices(3, 5), std::invalid_argument);
}

TEST_CASE("long-time series helpers") {
  LongtimeSeries s;
  s.t = {10, 20, 30, 40};
  s.relative_error = {1e-4, 0.05, 0.2, std::numeric_limits<double>::infinity()};
  CHECK(*s.first_exceedance(0.1) == 30.0);
  CHECK_FALSE(s.first_exceedance(std::numeric_limits<double>::infinity()));
  CHECK(s.max_error_until(20.0) == 0.05);
  s.relative_error[1] = std::nan("");
  CHECK(*s.first_exceedance(0.1) == 20.0);
}

TEST_CASE("small convergence and long-time runs") {
  const auto sp = build_zds(32);
  const auto ref = run_integration(sp, MethodFamily::RK4, Modification::none(), 2.0, 8000);
  REQUIRE_FALSE(ref.diverged());
  std::vector<RunPlan> plans;
  for (std::size_t n : {100, 200, 400}) plans.push_back({MethodFamily::ERK4, Modification::none(), n});
  const auto recs = run_convergence(sp, ref.y, 2.0, plans, 2);
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) CHECK(r.status == RunStatus::ok);
  CHECK(*recs[2].observed_order == doctest::Approx(4.0).epsilon(0.1));

  std::vector<std::size_t> ref_steps;
  for (auto s : sample_step_indices(400, 4)) ref_steps.push_back(s * 20);
  const auto sampled = run_integration(sp, MethodFamily::RK4, Modification::none(), 2.0, 8000, ref_steps);
  std::vector<ComplexVector<>> refs;
  for (const auto& s : sampled.samples) refs.push_back(s.y);
  const auto series = run_longtime(sp, refs, 2.0, 400, {{MethodFamily::ESDC6, Modification::none()}}, 1);
  REQUIRE(series.size() == 1);
  CHECK(series[0].t.back() == 2.0);
  CHECK(series[0].max_error_until(2.0) < 1e-8);
}

TEST_CASE("runs are deterministic") {
  const auto sp = build_zds(32);
  const auto mod = Modification::with(RepartitionSpec::angle(RepartitionKind::abs_k3, std::numbers::pi / 128));
  const auto a = run_integration(sp, MethodFamily::EPBM5, mod, 1.0, 50);
  const auto b = run_integration(sp, MethodFamily::EPBM5, mod, 1.0, 50);
  CHECK(a.y == b.y);
}

TEST_CASE("snapshot round trip is bitwise") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  SpectrumSnapshot s;
  s.problem = "zds";
  s.nx = 32;
  s.t = 1.0 / 3.0;
  s.values.resize(32);
  for (auto& v : s.values) v = cd(g(rng) * 1e-300, g(rng) * 1e20);
  s.values(3) = cd(-0.0, 5e-324);
  std::stringstream ss;
  write_snapshot(ss, s);
  s.blowup_step = 17;
  write_snapshot(ss, s);
  const auto back = read_snapshots(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].values == s.values);
  CHECK(back[0].t == s.t);
  CHECK(back[0].problem == "zds");
  CHECK_FALSE(back[0].blowup_step);
  CHECK(*back[1].blowup_step == 17);
  CHECK(std::signbit(back[0].values(3).real()));

  std::istringstream bad("# expstab-spectrum v1 problem=zds Nx=2 t=0\n1,2\n");
  CHECK_THROWS(read_snapshot(bad));
}

TEST_CASE("reference cache hit and miss") {
  const fs::path dir = scratch_dir("cache");
  ReferenceCache cache(dir);
  const auto sp = build_zds(32);
  ReferenceKey key;
  key.problem = "zds";
  key.nx = 32;
  key.t_end = 1.0;
  key.method = MethodFamily::RK4;
  key.steps = 400;
  key.samples = 4;
  key.sample_base = 100;

  CHECK_FALSE(cache.load(key));
  bool hit = true;
  const auto first = build_reference(sp, key, Modification::none(), cache, &hit);
  CHECK_FALSE(hit);
  REQUIRE(first.size() == 4);
  CHECK(first[0].t == doctest::Approx(0.25));
  const auto second = build_reference(sp, key, Modification::none(), cache, &hit);
  CHECK(hit);
  CHECK(second[3].values == first[3].values);

  ReferenceKey other = key;
  other.steps = 800;
  CHECK_FALSE(cache.load(other));
  CHECK(key.file_name() != other.file_name());

  // A file under the right name with a different key line is a miss.
  fs::copy_file(cache.path_for(key), cache.path_for(other));
  CHECK_FALSE(cache.load(other));

  // Truncated content is a miss, not an error.
  {
    std::ifstream in(cache.path_for(key));
    std::string all((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(cache.path_for(key), std::ios::trunc);
    out << all.substr(0, all.size() / 2);
  }
  CHECK_FALSE(cache.load(key));

  for (const auto& e : fs::directory_iterator(dir))
    CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("reference failures raise ReferenceError") {
  const auto sp = build_zds(64);
  ReferenceKey key;
  key.problem = "zds";
  key.nx = 64;
  key.t_end = 40.0;
  key.method = MethodFamily::RK4;
  key.steps = 50;
  CHECK_THROWS_AS(compute_reference(sp, key, Modification::none()), ReferenceError);
  key.samples = 3;
  key.sample_base = 7;
  CHECK_THROWS_AS(key.sample_steps(), ReferenceError);
}

TEST_CASE("killed writers never publish partial entries") {
  const fs::path dir = scratch_dir("atomic");
  const fs::path target = dir / "entry.ref";
  const std::string payload(4 << 20, 'x');
  for (int round = 0; round < 5; ++round) {
    const pid_t pid = ::fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
      for (;;) write_file_atomic(target, payload);
    }
    ::usleep(static_cast<useconds_t>(2000 + 3000 * round));
    ::kill(pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    if (fs::exists(target)) CHECK(fs::file_size(target) == payload.size());
  }
  fs::remove_all(dir);
}

TEST_CASE("cache directory from the environment") {
  ::setenv("EXPSTAB_CACHE_DIR", "/tmp/somewhere-else", 1);
  CHECK(default_cache_dir() == fs::path("/tmp/somewhere-else"));
  ::unsetenv("EXPSTAB_CACHE_DIR");
  ::setenv("XDG_CACHE_HOME", "/tmp/xdg", 1);
  CHECK(default_cache_dir() == fs::path("/tmp/xdg/expstab"));
  ::unsetenv("XDG_CACHE_HOME");
}
