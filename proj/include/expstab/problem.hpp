#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace expstab {

using Complex = std::complex<double>;

template <int Size = Eigen::Dynamic>
using ComplexVector = Eigen::Matrix<Complex, Size, 1>;

/// y' = diag(linear)·y + nonlinear(t, y).
///
/// The nonlinear evaluator must be pure: no state shared between calls, so
/// independent evaluations may run concurrently.
template <int Size = Eigen::Dynamic>
struct SemilinearProblem {
  using Vector = ComplexVector<Size>;
  using Nonlinear = std::function<Vector(double, const Vector&)>;

  Vector linear;
  Nonlinear nonlinear;

  Eigen::Index dimension() const { return linear.size(); }
  Vector eval_nonlinear(double t, const Vector& y) const { return nonlinear(t, y); }
  Vector eval_full(double t, const Vector& y) const {
    return linear.cwiseProduct(y) + nonlinear(t, y);
  }
};

/// L̂ = L + εD, N̂(t, y) = N(t, y) − εD·y with D diagonal.
template <int Size = Eigen::Dynamic>
struct DiagonalRepartition {
  ComplexVector<Size> diffusive;
  double epsilon = 0.0;
};

/// L̃ = L + dt^(q+1)·γ·D̃ with D̃ diagonal; the nonlinear term is untouched.
template <int Size = Eigen::Dynamic>
struct DiagonalHyperviscosity {
  ComplexVector<Size> diffusive;
  double gamma = 0.0;
  int method_order = 4;
};

template <int Size>
SemilinearProblem<Size> repartitioned(const SemilinearProblem<Size>& problem,
                                      const DiagonalRepartition<Size>& rep) {
  if (rep.epsilon < 0.0) throw std::invalid_argument("repartition: epsilon must be >= 0");
  if (rep.diffusive.size() != problem.dimension())
    throw std::invalid_argument("repartition: dimension mismatch");
  if (rep.epsilon == 0.0) return problem;
  ComplexVector<Size> shift = rep.epsilon * rep.diffusive;
  SemilinearProblem<Size> out;
  out.linear = problem.linear + shift;
  out.nonlinear = [inner = problem.nonlinear, shift](double t, const ComplexVector<Size>& y) {
    ComplexVector<Size> n = inner(t, y);
    n -= shift.cwiseProduct(y);
    return n;
  };
  return out;
}

template <int Size>
SemilinearProblem<Size> hyperviscous(const SemilinearProblem<Size>& problem,
                                     const DiagonalHyperviscosity<Size>& hv, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("hyperviscosity: dt must be positive");
  if (hv.gamma < 0.0) throw std::invalid_argument("hyperviscosity: gamma must be >= 0");
  if (hv.gamma == 0.0) return problem;
  SemilinearProblem<Size> out = problem;
  out.linear += (std::pow(dt, hv.method_order + 1) * hv.gamma) * hv.diffusive;
  return out;
}

}  // namespace expstab
