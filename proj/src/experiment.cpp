#include "expstab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "expstab/parallel.hpp"

namespace expstab {

double relative_error(const ComplexVector<>& y, const ComplexVector<>& y_ref) {
  if (y.size() != y_ref.size()) throw std::invalid_argument("relative_error: length mismatch");
  const double denom = y_ref.size() ? y_ref.cwiseAbs().maxCoeff() : 0.0;
  if (!(denom > 0.0)) throw std::invalid_argument("relative_error: zero reference");
  return (y_ref - y).cwiseAbs().maxCoeff() / denom;
}

Modification Modification::with(RepartitionSpec r) {
  Modification m;
  m.repartition = r;
  return m;
}

Modification Modification::with(HyperviscositySpec h) {
  Modification m;
  m.hyperviscosity = h;
  return m;
}

std::string Modification::describe() const {
  if (repartition) return repartition->describe();
  if (hyperviscosity) return hyperviscosity->describe();
  return "none";
}

IntegrateOptions<> integrate_options(const SpectralProblem& sp, const Modification& mod) {
  if (mod.repartition && mod.hyperviscosity)
    throw std::invalid_argument("modification: repartition and hyperviscosity are exclusive");
  IntegrateOptions<> options;
  if (mod.repartition) options.repartition = repartition_operator(sp, *mod.repartition);
  if (mod.hyperviscosity) options.hyperviscosity = hyperviscosity_operator(sp.grid, *mod.hyperviscosity);
  return options;
}

IntegrationResult<> run_integration(const SpectralProblem& sp, MethodFamily method,
                                    const Modification& mod, double t_end, std::size_t n_steps,
                                    std::vector<std::size_t> sample_steps) {
  IntegrateOptions<> options = integrate_options(sp, mod);
  options.sample_steps = std::move(sample_steps);
  return integrate(sp.problem, MethodSpec::make(method), sp.initial, 0.0, t_end, n_steps, options);
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::blowup: return "blowup";
    case RunStatus::nonconverged: return "nonconverged";
  }
  return "?";
}

double observed_order(double h1, double e1, double h2, double e2) {
  if (!(h1 > 0.0) || !(h2 > 0.0) || h1 == h2 || !(e1 > 0.0) || !(e2 > 0.0))
    throw std::invalid_argument("observed_order: need distinct positive steps and errors");
  return std::log(e1 / e2) / std::log(h1 / h2);
}

void assign_observed_orders(std::vector<RunRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].observed_order.reset();
    groups[{records[i].method, records[i].modification}].push_back(i);
  }
  for (auto& [key, idx] : groups) {
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return records[a].n_steps < records[b].n_steps; });
    for (std::size_t m = 1; m < idx.size(); ++m) {
      const RunRecord& prev = records[idx[m - 1]];
      RunRecord& cur = records[idx[m]];
      if (prev.status != RunStatus::ok || cur.status != RunStatus::ok) continue;
      if (!(prev.relative_error > 0.0) || !(cur.relative_error > 0.0)) continue;
      cur.observed_order = observed_order(prev.h, prev.relative_error, cur.h, cur.relative_error);
    }
  }
}

std::optional<double> fitted_order(const std::vector<RunRecord>& records) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.status != RunStatus::ok || !(r.relative_error > 0.0)) continue;
    const double x = std::log(r.h), y = std::log(r.relative_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (dn * sxy - sx * sy) / denom;
}

std::vector<RunRecord> run_convergence(const SpectralProblem& sp, const ComplexVector<>& reference,
                                       double t_end, const std::vector<RunPlan>& plans,
                                       unsigned workers) {
  std::vector<RunRecord> records(plans.size());
  parallel_for(
      plans.size(),
      [&](std::size_t i) {
        const RunPlan& plan = plans[i];
        RunRecord& rec = records[i];
        rec.method = std::string(method_name(plan.method));
        rec.modification = plan.modification.describe();
        rec.n_steps = plan.n_steps;
        const auto start = std::chrono::steady_clock::now();
        const auto result = run_integration(sp, plan.method, plan.modification, t_end, plan.n_steps);
        rec.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.h = result.h;
        if (result.diverged()) {
          rec.status = RunStatus::blowup;
          rec.relative_error = std::numeric_limits<double>::quiet_NaN();
          return;
        }
        rec.relative_error = relative_error(result.y, reference);
        rec.status = rec.relative_error > kNonconvergedThreshold ? RunStatus::nonconverged : RunStatus::ok;
      },
      workers);
  assign_observed_orders(records);
  return records;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_convergence_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "method,modification,n_steps,h,relative_error,wall_time_seconds,status,observed_order\n";
  for (const auto& r : records) {
    os << r.method << ',' << r.modification << ',' << r.n_steps << ',' << format_number(r.h) << ','
       << format_number(r.relative_error) << ',' << format_number(r.wall_time_seconds) << ','
       << status_name(r.status) << ',';
    if (r.observed_order) os << format_number(*r.observed_order);
    os << '\n';
  }
}

std::vector<std::size_t> sample_step_indices(std::size_t n_steps, std::size_t count) {
  if (count == 0) throw std::invalid_argument("sample_step_indices: count must be positive");
  if (n_steps < count) throw std::invalid_argument("sample_step_indices: fewer steps than samples");
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t i = 1; i <= count; ++i)
    out.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(n_steps) / static_cast<double>(count))));
  return out;
}

std::optional<double> LongtimeSeries::first_exceedance(double threshold) const {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!(relative_error[i] <= threshold)) return t[i];
  return std::nullopt;
}

double LongtimeSeries::max_error_until(double t_max) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] <= t_max + 1e-12 * std::max(1.0, std::abs(t_max)))
      worst = std::max(worst, relative_error[i]);
  return worst;
}

std::vector<LongtimeSeries> run_longtime(const SpectralProblem& sp,
                                         const std::vector<ComplexVector<>>& references,
                                         double t_end, std::size_t n_steps,
                                         const std::vector<LongtimePlan>& plans, unsigned workers) {
  const auto steps = sample_step_indices(n_steps, references.size());
  const double h = t_end / static_cast<double>(n_steps);
  std::vector<LongtimeSeries> out(plans.size());
  parallel_for(
      plans.size(),
      [&](std::size_t p) {
        const LongtimePlan& plan = plans[p];
        LongtimeSeries& s = out[p];
        s.method = std::string(method_name(plan.method));
        s.modification = plan.modification.describe();
        const auto result = run_integration(sp, plan.method, plan.modification, t_end, n_steps, steps);
        s.last_finite_time = result.t;
        if (result.diverged())
          s.blowup_time = static_cast<double>(*result.blowup_step) * h;
        for (std::size_t i = 0; i < steps.size(); ++i) {
          const double t = steps[i] == n_steps ? t_end : static_cast<double>(steps[i]) * h;
          s.t.push_back(t);
          const auto hit = std::find_if(result.samples.begin(), result.samples.end(),
                                        [&](const Sample<>& smp) { return smp.step == steps[i]; });
          s.relative_error.push_back(hit == result.samples.end()
                                         ? std::numeric_limits<double>::infinity()
                                         : relative_error(hit->y, references[i]));
        }
      },
      workers);
  return out;
}

void write_longtime_csv(std::ostream& os, const std::vector<LongtimeSeries>& series) {
  os << "method,modification,t,relative_error\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.t.size(); ++i)
      os << s.method << ',' << s.modification << ',' << format_number(s.t[i]) << ','
         << format_number(s.relative_error[i]) << '\n';
}

void write_longtime_summary_csv(std::ostream& os, const std::vector<LongtimeSeries>& series) {
  os << "method,modification,last_finite_time,blowup_time,max_relative_error\n";
  for (const auto& s : series) {
    os << s.method << ',' << s.modification << ',' << format_number(s.last_finite_time) << ',';
    if (s.blowup_time) os << format_number(*s.blowup_time);
    os << ',' << format_number(s.max_error_until(std::numeric_limits<double>::infinity())) << '\n';
  }
}

}  // namespace expstab
