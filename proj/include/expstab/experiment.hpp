#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "expstab/integrators.hpp"
#include "expstab/methods.hpp"
#include "expstab/spectral.hpp"

namespace expstab {

/// ‖y_ref − y‖∞ / ‖y_ref‖∞. Throws on length mismatch or a zero reference.
double relative_error(const ComplexVector<>& y, const ComplexVector<>& y_ref);

/// At most one of the two is set.
struct Modification {
  std::optional<RepartitionSpec> repartition;
  std::optional<HyperviscositySpec> hyperviscosity;

  static Modification none() { return {}; }
  static Modification with(RepartitionSpec r);
  static Modification with(HyperviscositySpec h);

  /// "none", "abs_k3:rho=...", "hyperviscosity:m=...".
  std::string describe() const;
};

IntegrateOptions<> integrate_options(const SpectralProblem& sp, const Modification& mod);

IntegrationResult<> run_integration(const SpectralProblem& sp, MethodFamily method,
                                    const Modification& mod, double t_end, std::size_t n_steps,
                                    std::vector<std::size_t> sample_steps = {});

enum class RunStatus { ok, blowup, nonconverged };
std::string status_name(RunStatus s);

/// Relative error above which a finite run is reported as nonconverged.
inline constexpr double kNonconvergedThreshold = 0.1;

struct RunRecord {
  std::string method;
  std::string modification;
  std::size_t n_steps = 0;
  double h = 0.0;
  /// NaN when the run blew up.
  double relative_error = 0.0;
  double wall_time_seconds = 0.0;
  RunStatus status = RunStatus::ok;
  /// log(e_prev/e)/log(h_prev/h) against the previous step count of the
  /// same method and modification, when both runs are ok.
  std::optional<double> observed_order;
};

/// log(e1/e2)/log(h1/h2).
double observed_order(double h1, double e1, double h2, double e2);

/// Fills observed_order for consecutive ok records of each (method,
/// modification) pair, ordered by n_steps.
void assign_observed_orders(std::vector<RunRecord>& records);

/// Least-squares slope of log e against log h over ok records; nullopt with
/// fewer than two points.
std::optional<double> fitted_order(const std::vector<RunRecord>& records);

struct RunPlan {
  MethodFamily method = MethodFamily::ERK4;
  Modification modification;
  std::size_t n_steps = 0;
};

/// Runs every plan against the final reference spectrum; records come back in
/// plan order.
std::vector<RunRecord> run_convergence(const SpectralProblem& sp, const ComplexVector<>& reference,
                                       double t_end, const std::vector<RunPlan>& plans,
                                       unsigned workers = 0);

/// header: method,modification,n_steps,h,relative_error,wall_time_seconds,status,observed_order
void write_convergence_csv(std::ostream& os, const std::vector<RunRecord>& records);

/// Step indices round(i·n/count), i = 1..count.
std::vector<std::size_t> sample_step_indices(std::size_t n_steps, std::size_t count);

struct LongtimeSeries {
  std::string method;
  std::string modification;
  std::vector<double> t;
  /// +inf at samples past a blowup.
  std::vector<double> relative_error;
  std::optional<double> blowup_time;
  double last_finite_time = 0.0;

  /// First sample time with error above the threshold.
  std::optional<double> first_exceedance(double threshold) const;
  /// Largest error over samples with t ≤ t_max.
  double max_error_until(double t_max) const;
};

struct LongtimePlan {
  MethodFamily method = MethodFamily::ERK4;
  Modification modification;
};

/// references[i] corresponds to sample_step_indices(n_steps, references.size())[i].
std::vector<LongtimeSeries> run_longtime(const SpectralProblem& sp,
                                         const std::vector<ComplexVector<>>& references,
                                         double t_end, std::size_t n_steps,
                                         const std::vector<LongtimePlan>& plans, unsigned workers = 0);

/// header: method,modification,t,relative_error
void write_longtime_csv(std::ostream& os, const std::vector<LongtimeSeries>& series);
/// header: method,modification,last_finite_time,blowup_time,max_relative_error
void write_longtime_summary_csv(std::ostream& os, const std::vector<LongtimeSeries>& series);

/// %.17g with '.' as decimal separator.
std::string format_number(double v);

}  // namespace expstab
