#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "expstab/methods.hpp"
#include "expstab/phi.hpp"
#include "expstab/problem.hpp"

namespace expstab {

/// Raised when a step produces non-finite values.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError() : std::runtime_error("divergence detected") {}
};

template <int Size = Eigen::Dynamic>
struct StepperState {
  double t = 0.0;
  ComplexVector<Size> y;
};

/// Five solution values y_j ≈ y(t + radius·z_j) for the block method.
template <int Size = Eigen::Dynamic>
struct BlockState {
  double t = 0.0;
  double radius = 0.0;
  std::array<ComplexVector<Size>, EpbmTableau::kNodes> values;

  double node_time(const EpbmTableau& tab, int j) const { return t + radius * tab.nodes[j]; }
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v) {
  if (!v.allFinite()) throw DivergenceError();
}

}  // namespace detail

template <int Size>
StepperState<Size> step_exp_euler(const SemilinearProblem<Size>& problem,
                                  const StepperState<Size>& state, double h,
                                  PhiCache<Size>& phis) {
  const auto& full = phis.at(h);
  StepperState<Size> out{state.t + h,
                         full[0].cwiseProduct(state.y) +
                             h * full[1].cwiseProduct(problem.eval_nonlinear(state.t, state.y))};
  detail::require_finite(out.y);
  return out;
}

/// Fourth-order exponential Runge–Kutta (Krogstad's ETDRK4-B).
template <int Size>
StepperState<Size> step_erk4(const SemilinearProblem<Size>& problem,
                             const StepperState<Size>& state, double h, PhiCache<Size>& phis) {
  using Vector = ComplexVector<Size>;
  const auto& half = phis.at(0.5 * h);
  const auto& full = phis.at(h);
  const double t = state.t;
  const Vector& y = state.y;

  const Vector half_y = half[0].cwiseProduct(y);
  const Vector k0 = problem.eval_nonlinear(t, y);
  const Vector a = half_y + (0.5 * h) * half[1].cwiseProduct(k0);
  const Vector k1 = problem.eval_nonlinear(t + 0.5 * h, a);
  const Vector b =
      half_y + h * ((0.5 * half[1] - half[2]).cwiseProduct(k0) + half[2].cwiseProduct(k1));
  const Vector k2 = problem.eval_nonlinear(t + 0.5 * h, b);
  const Vector full_y = full[0].cwiseProduct(y);
  const Vector c = full_y + h * ((full[1] - 2.0 * full[2]).cwiseProduct(k0) +
                                 2.0 * full[2].cwiseProduct(k2));
  const Vector k3 = problem.eval_nonlinear(t + h, c);

  StepperState<Size> out;
  out.t = t + h;
  out.y = full_y + h * ((full[1] - 3.0 * full[2] + 4.0 * full[3]).cwiseProduct(k0) +
                        (2.0 * full[2] - 4.0 * full[3]).cwiseProduct(k1 + k2) +
                        (4.0 * full[3] - full[2]).cwiseProduct(k3));
  detail::require_finite(out.y);
  return out;
}

/// Sixth-order exponential spectral deferred correction: exponential Euler
/// predictor on the Lobatto nodes followed by `tab.sweeps` corrections.
template <int Size>
StepperState<Size> step_esdc6(const SemilinearProblem<Size>& problem,
                              const StepperState<Size>& state, double h, PhiCache<Size>& phis,
                              const EsdcTableau& tab) {
  using Vector = ComplexVector<Size>;
  constexpr int kNodes = EsdcTableau::kNodes;
  constexpr int kSub = EsdcTableau::kSubsteps;

  std::array<const PhiTable<Size>*, kSub> table{};
  std::array<double, kSub> width{};
  for (int j = 0; j < kSub; ++j) {
    width[j] = tab.substep_fraction[j] * h;
    table[j] = &phis.at(width[j]);
  }
  auto node_time = [&](int j) { return state.t + tab.nodes[j] * h; };

  std::array<Vector, kNodes> y_old, y_new, n_old, n_new;
  y_old[0] = state.y;
  n_old[0] = problem.eval_nonlinear(state.t, state.y);
  for (int j = 0; j < kSub; ++j) {
    const auto& phi = *table[j];
    y_old[j + 1] = phi[0].cwiseProduct(y_old[j]) + width[j] * phi[1].cwiseProduct(n_old[j]);
    n_old[j + 1] = problem.eval_nonlinear(node_time(j + 1), y_old[j + 1]);
  }

  std::array<Vector, kSub> integral;
  for (int sweep = 1; sweep <= tab.sweeps; ++sweep) {
    const bool last = sweep == tab.sweeps;
    for (int j = 0; j < kSub; ++j) {
      const auto& phi = *table[j];
      integral[j] = Vector::Zero(state.y.size());
      for (int nu = 1; nu <= kNodes; ++nu) {
        Vector b_nu = tab.weights[j](nu - 1, 0) * n_old[0];
        for (int l = 1; l < kNodes; ++l) b_nu += tab.weights[j](nu - 1, l) * n_old[l];
        integral[j] += phi[nu].cwiseProduct(b_nu);
      }
      integral[j] *= width[j];
    }
    y_new[0] = state.y;
    n_new[0] = n_old[0];
    for (int j = 0; j < kSub; ++j) {
      const auto& phi = *table[j];
      y_new[j + 1] = phi[0].cwiseProduct(y_new[j]) +
                     width[j] * phi[1].cwiseProduct(n_new[j] - n_old[j]) + integral[j];
      if (!last || j + 1 < kSub)
        n_new[j + 1] = problem.eval_nonlinear(node_time(j + 1), y_new[j + 1]);
    }
    std::swap(y_old, y_new);
    std::swap(n_old, n_new);
  }

  StepperState<Size> out{state.t + h, y_old[kNodes - 1]};
  detail::require_finite(out.y);
  return out;
}

/// v_1..v_4 from the nonlinear values at nodes 2..5.
template <int Size>
std::array<ComplexVector<Size>, 4> epbm_v_coefficients(
    const EpbmTableau& tab, const std::array<ComplexVector<Size>, 4>& n_values) {
  std::array<ComplexVector<Size>, 4> v;
  for (int k = 0; k < 4; ++k) {
    v[k] = tab.v_map(k, 0) * n_values[0];
    for (int i = 1; i < 4; ++i) v[k] += tab.v_map(k, i) * n_values[i];
  }
  return v;
}

/// One block-method pass with extrapolation factor alpha; outputs sit at
/// t + radius·(z_j + alpha).
template <int Size>
BlockState<Size> epbm_pass(const SemilinearProblem<Size>& problem, const BlockState<Size>& in,
                           double alpha, PhiCache<Size>& phis, const EpbmTableau& tab) {
  using Vector = ComplexVector<Size>;
  const double r = in.radius;
  std::array<Vector, 4> n_values;
  // Independent evaluations; N_1 does not enter the interpolant.
  for (int i = 0; i < 4; ++i)
    n_values[i] = problem.eval_nonlinear(in.node_time(tab, i + 1), in.values[i + 1]);
  const auto v = epbm_v_coefficients<Size>(tab, n_values);

  BlockState<Size> out;
  out.t = in.t + alpha * r;
  out.radius = r;
  for (int j = 0; j < EpbmTableau::kNodes; ++j) {
    const double eta = tab.eta(j, alpha);
    if (eta == 0.0) {
      out.values[j] = in.values[0];
      continue;
    }
    const auto& phi = phis.at(r * eta);
    Vector acc = Vector::Zero(in.values[0].size());
    double eta_pow = 1.0;
    for (int k = 1; k <= 4; ++k) {
      eta_pow *= eta;
      acc += eta_pow * phi[k].cwiseProduct(v[k - 1]);
    }
    out.values[j] = phi[0].cwiseProduct(in.values[0]) + r * acc;
  }
  return out;
}

/// Composite step: predict with alpha = 1, then correct with alpha = 0.
/// Advances the block by one radius.
template <int Size>
BlockState<Size> step_epbm5(const SemilinearProblem<Size>& problem, const BlockState<Size>& state,
                            PhiCache<Size>& phis, const EpbmTableau& tab) {
  const BlockState<Size> predicted = epbm_pass(problem, state, 1.0, phis, tab);
  BlockState<Size> out = epbm_pass(problem, predicted, 0.0, phis, tab);
  for (const auto& v : out.values) detail::require_finite(v);
  return out;
}

template <int Size>
StepperState<Size> step_rk4(const SemilinearProblem<Size>& problem,
                            const StepperState<Size>& state, double h) {
  using Vector = ComplexVector<Size>;
  const double t = state.t;
  const Vector& y = state.y;
  const Vector k1 = problem.eval_full(t, y);
  const Vector k2 = problem.eval_full(t + 0.5 * h, y + (0.5 * h) * k1);
  const Vector k3 = problem.eval_full(t + 0.5 * h, y + (0.5 * h) * k2);
  const Vector k4 = problem.eval_full(t + h, y + h * k3);
  StepperState<Size> out{t + h, y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)};
  detail::require_finite(out.y);
  return out;
}

/// Additive Runge–Kutta step: L implicit through diagonal solves, N explicit.
template <int Size>
StepperState<Size> step_imrk4(const SemilinearProblem<Size>& problem,
                              const StepperState<Size>& state, double h,
                              const ButcherPair& pair) {
  using Vector = ComplexVector<Size>;
  constexpr int kStages = ButcherPair::kStages;
  std::array<Vector, kStages> f_explicit, f_implicit;
  const Vector& y = state.y;
  for (int i = 0; i < kStages; ++i) {
    Vector stage = y;
    for (int j = 0; j < i; ++j) {
      if (pair.explicit_a(i, j) != 0.0) stage += (h * pair.explicit_a(i, j)) * f_explicit[j];
      if (pair.implicit_a(i, j) != 0.0) stage += (h * pair.implicit_a(i, j)) * f_implicit[j];
    }
    const double diag = pair.implicit_a(i, i);
    if (diag != 0.0) {
      const Vector denom = Vector::Ones(y.size()) - (h * diag) * problem.linear;
      if ((denom.array() == Complex(0.0, 0.0)).any())
        throw std::domain_error("implicit solve singular");
      stage = stage.cwiseQuotient(denom);
    }
    f_explicit[i] = problem.eval_nonlinear(state.t + pair.c(i) * h, stage);
    f_implicit[i] = problem.linear.cwiseProduct(stage);
  }
  Vector increment = Vector::Zero(y.size());
  for (int i = 0; i < kStages; ++i)
    if (pair.b(i) != 0.0) increment += pair.b(i) * (f_explicit[i] + f_implicit[i]);
  StepperState<Size> out{state.t + h, y + h * increment};
  detail::require_finite(out.y);
  return out;
}

/// Minimum RK4 substeps per node gap during block startup.
inline constexpr int kStartupSubsteps = 200;

/// Starting block for the block method. The earliest node is placed at t0 so
/// the block is filled by forward RK4 substepping from y0; the returned
/// state has t = t0 + r. Substeps per gap are raised above the minimum when
/// needed to keep gap/m·max|L| ≤ 1.
template <int Size>
BlockState<Size> epbm_initialize(const SemilinearProblem<Size>& problem, const EpbmTableau& tab,
                                 const ComplexVector<Size>& y0, double t0, double r,
                                 int min_substeps = kStartupSubsteps) {
  if (!(r > 0.0)) throw std::invalid_argument("epbm_initialize: radius must be positive");
  const double linear_radius =
      problem.linear.size() > 0 ? problem.linear.cwiseAbs().maxCoeff() : 0.0;
  BlockState<Size> block;
  block.radius = r;
  block.t = t0 - r * tab.nodes[0];
  block.values[0] = y0;
  StepperState<Size> s{t0, y0};
  for (int j = 1; j < EpbmTableau::kNodes; ++j) {
    const double gap = r * (tab.nodes[j] - tab.nodes[j - 1]);
    const int substeps =
        std::max(min_substeps, static_cast<int>(std::ceil(gap * linear_radius)));
    const double dt = gap / substeps;
    const double start = s.t;
    for (int m = 0; m < substeps; ++m) {
      s = step_rk4(problem, s, dt);
    }
    s.t = start + gap;
    block.values[j] = s.y;
  }
  return block;
}

template <int Size = Eigen::Dynamic>
struct IntegrateOptions {
  std::optional<DiagonalRepartition<Size>> repartition;
  std::optional<DiagonalHyperviscosity<Size>> hyperviscosity;
  /// Step indices (0..n_steps) at which to record the solution.
  std::vector<std::size_t> sample_steps;
  /// A state whose max-norm exceeds this multiple of the initial max-norm is
  /// treated as blown up.
  double blowup_ratio = 1e8;
};

template <int Size = Eigen::Dynamic>
struct Sample {
  std::size_t step = 0;
  double t = 0.0;
  ComplexVector<Size> y;
};

template <int Size = Eigen::Dynamic>
struct IntegrationResult {
  /// Final state, or the last finite state when the run blew up.
  ComplexVector<Size> y;
  double t = 0.0;
  double h = 0.0;
  std::size_t steps_completed = 0;
  std::optional<std::size_t> blowup_step;
  std::vector<Sample<Size>> samples;

  bool diverged() const { return blowup_step.has_value(); }
};

/// Fixed-step integration from t0 to t1. For the block method the step is
/// the block radius and the reported solution is the first block node.
template <int Size>
IntegrationResult<Size> integrate(const SemilinearProblem<Size>& base, const MethodSpec& method,
                                  const ComplexVector<Size>& y0, double t0, double t1,
                                  std::size_t n_steps,
                                  const IntegrateOptions<Size>& options = {}) {
  if (n_steps < 1) throw std::invalid_argument("integrate: n_steps must be >= 1");
  if (!(t1 > t0)) throw std::invalid_argument("integrate: empty time span");
  if (options.repartition && options.hyperviscosity)
    throw std::invalid_argument("integrate: repartition and hyperviscosity are exclusive");
  const double h = (t1 - t0) / static_cast<double>(n_steps);

  SemilinearProblem<Size> problem = base;
  if (options.repartition) problem = repartitioned(problem, *options.repartition);
  if (options.hyperviscosity) problem = hyperviscous(problem, *options.hyperviscosity, h);

  PhiCache<Size> phis(problem.linear, 4);
  const double limit =
      options.blowup_ratio * std::max(y0.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

  IntegrationResult<Size> result;
  result.h = h;
  result.y = y0;
  result.t = t0;
  std::vector<std::size_t> wanted = options.sample_steps;
  std::sort(wanted.begin(), wanted.end());
  auto next_sample = wanted.begin();
  auto record = [&](std::size_t step, double t, const ComplexVector<Size>& y) {
    while (next_sample != wanted.end() && *next_sample == step) {
      result.samples.push_back({step, t, y});
      ++next_sample;
    }
  };
  record(0, t0, y0);

  auto healthy = [&](const ComplexVector<Size>& y) {
    return y.allFinite() && y.cwiseAbs().maxCoeff() <= limit;
  };

  const auto family = method.family;
  if (family == MethodFamily::EPBM5) {
    const EpbmTableau& tab = *method.epbm;
    BlockState<Size> block;
    try {
      block = epbm_initialize(problem, tab, y0, t0, h);
    } catch (const DivergenceError&) {
      result.blowup_step = 0;
      return result;
    }
    for (std::size_t n = 1; n <= n_steps; ++n) {
      BlockState<Size> next;
      try {
        next = step_epbm5(problem, block, phis, tab);
      } catch (const DivergenceError&) {
        result.blowup_step = n;
        return result;
      }
      if (!healthy(next.values[0])) {
        result.blowup_step = n;
        return result;
      }
      block = std::move(next);
      const double t = (n == n_steps) ? t1 : t0 + static_cast<double>(n) * h;
      result.y = block.values[0];
      result.t = t;
      result.steps_completed = n;
      record(n, t, result.y);
    }
    return result;
  }

  StepperState<Size> state{t0, y0};
  for (std::size_t n = 1; n <= n_steps; ++n) {
    StepperState<Size> next;
    try {
      switch (family) {
        case MethodFamily::ERK4: next = step_erk4(problem, state, h, phis); break;
        case MethodFamily::ESDC6: next = step_esdc6(problem, state, h, phis, *method.esdc); break;
        case MethodFamily::IMRK4: next = step_imrk4(problem, state, h, *method.imex); break;
        case MethodFamily::RK4: next = step_rk4(problem, state, h); break;
        case MethodFamily::ExpEuler: next = step_exp_euler(problem, state, h, phis); break;
        case MethodFamily::EPBM5: break;
      }
    } catch (const DivergenceError&) {
      result.blowup_step = n;
      return result;
    }
    if (!healthy(next.y)) {
      result.blowup_step = n;
      return result;
    }
    next.t = (n == n_steps) ? t1 : t0 + static_cast<double>(n) * h;
    state = std::move(next);
    result.y = state.y;
    result.t = state.t;
    result.steps_completed = n;
    record(n, state.t, state.y);
  }
  return result;
}

}  // namespace expstab
