#include "expstab/stability.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "expstab/integrators.hpp"
#include "expstab/parallel.hpp"

namespace expstab {

namespace {

using Scalar1 = ComplexVector<1>;

SemilinearProblem<1> dahlquist_problem(DahlquistPoint p, RepartitionAngle rep) {
  SemilinearProblem<1> problem;
  problem.linear(0) = repartitioned_linear(p, rep);
  const Complex coupling = repartitioned_explicit(p, rep);
  problem.nonlinear = [coupling](double, const Scalar1& y) -> Scalar1 { return coupling * y; };
  return problem;
}

double max_norm(const TransferMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

RepartitionAngle RepartitionAngle::from_rho(double rho) {
  if (!(rho >= 0.0) || !(rho < std::numbers::pi / 2))
    throw std::invalid_argument("rho must lie in [0, pi/2)");
  RepartitionAngle a;
  a.rho_ = rho;
  a.epsilon_ = rho == 0.0 ? 0.0 : std::tan(rho);
  return a;
}

Complex repartitioned_linear(DahlquistPoint p, RepartitionAngle rep) {
  if (rep.epsilon() == 0.0) return {0.0, p.k1};
  return {-rep.epsilon() * std::abs(p.k1), p.k1};
}

Complex repartitioned_explicit(DahlquistPoint p, RepartitionAngle rep) {
  if (rep.epsilon() == 0.0) return {0.0, p.k2};
  return {rep.epsilon() * std::abs(p.k1), p.k2};
}

Complex stability_scalar(const MethodSpec& method, DahlquistPoint p, RepartitionAngle rep) {
  if (!std::isfinite(p.k1) || !std::isfinite(p.k2))
    throw std::invalid_argument("stability_scalar: non-finite point");
  const auto problem = dahlquist_problem(p, rep);
  PhiCache<1> phis(problem.linear, 4);
  const StepperState<1> start{0.0, Scalar1::Constant(Complex(1.0, 0.0))};
  StepperState<1> end;
  switch (method.family) {
    case MethodFamily::ERK4: end = step_erk4(problem, start, 1.0, phis); break;
    case MethodFamily::ESDC6: end = step_esdc6(problem, start, 1.0, phis, *method.esdc); break;
    case MethodFamily::IMRK4: end = step_imrk4(problem, start, 1.0, *method.imex); break;
    case MethodFamily::RK4: end = step_rk4(problem, start, 1.0); break;
    case MethodFamily::ExpEuler: end = step_exp_euler(problem, start, 1.0, phis); break;
    case MethodFamily::EPBM5:
      throw std::invalid_argument("stability_scalar: block method has a transfer matrix");
  }
  return end.y(0);
}

TransferMatrix epbm_pass_matrix(DahlquistPoint p, RepartitionAngle rep, double alpha) {
  static const EpbmTableau tab = EpbmTableau::make();
  const auto problem = dahlquist_problem(p, rep);
  PhiCache<1> phis(problem.linear, 4);
  TransferMatrix m(EpbmTableau::kNodes, EpbmTableau::kNodes);
  for (int col = 0; col < EpbmTableau::kNodes; ++col) {
    BlockState<1> in;
    in.t = 0.0;
    in.radius = 1.0;
    for (int j = 0; j < EpbmTableau::kNodes; ++j)
      in.values[j] = Scalar1::Constant(Complex(j == col ? 1.0 : 0.0, 0.0));
    const auto out = epbm_pass(problem, in, alpha, phis, tab);
    for (int j = 0; j < EpbmTableau::kNodes; ++j) m(j, col) = out.values[j](0);
  }
  return m;
}

TransferMatrix epbm_transfer_matrix(DahlquistPoint p, RepartitionAngle rep) {
  static const EpbmTableau tab = EpbmTableau::make();
  const auto problem = dahlquist_problem(p, rep);
  PhiCache<1> phis(problem.linear, 4);
  TransferMatrix m(EpbmTableau::kNodes, EpbmTableau::kNodes);
  for (int col = 0; col < EpbmTableau::kNodes; ++col) {
    BlockState<1> in;
    in.t = 0.0;
    in.radius = 1.0;
    for (int j = 0; j < EpbmTableau::kNodes; ++j)
      in.values[j] = Scalar1::Constant(Complex(j == col ? 1.0 : 0.0, 0.0));
    const auto out = step_epbm5(problem, in, phis, tab);
    for (int j = 0; j < EpbmTableau::kNodes; ++j) m(j, col) = out.values[j](0);
  }
  return m;
}

TransferMatrix transfer_matrix(const MethodSpec& method, DahlquistPoint p, RepartitionAngle rep) {
  if (method.is_block()) return epbm_transfer_matrix(p, rep);
  TransferMatrix m(1, 1);
  m(0, 0) = stability_scalar(method, p, rep);
  return m;
}

std::string_view class_name(StabilityClass c) {
  switch (c) {
    case StabilityClass::stable: return "stable";
    case StabilityClass::marginal: return "marginal";
    case StabilityClass::unstable: return "unstable";
  }
  return "?";
}

StabilityClass classify_amplification(double abs_r) {
  if (abs_r <= 1.0 + kStableTolerance) return StabilityClass::stable;
  if (abs_r <= kExtendedBand) return StabilityClass::marginal;
  return StabilityClass::unstable;
}

PowerBoundedness power_bounded_classification(const TransferMatrix& m, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("power_bounded_classification: tol must be > 0");
  PowerBoundedness result;
  if (m.rows() == 1 && m.cols() == 1) {
    result.spectral_radius = std::abs(m(0, 0));
  } else {
    Eigen::ComplexEigenSolver<TransferMatrix> solver(m, false);
    if (solver.info() != Eigen::Success) {
      result.solver_failed = true;
      result.classification = StabilityClass::marginal;
      return result;
    }
    result.spectral_radius = solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  result.classification = classify_amplification(result.spectral_radius);

  if (std::abs(result.spectral_radius - 1.0) <= tol) {
    result.powered = true;
    const double bound = 10.0 * std::max(max_norm(m), std::numeric_limits<double>::min());
    TransferMatrix power = m;
    for (int n = 1; n < 10000; ++n) {
      power = power * m;
      if (max_norm(power) > bound) {
        result.classification = StabilityClass::unstable;
        break;
      }
    }
  }
  return result;
}

double GridAxis::at(std::size_t i) const {
  if (count <= 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

double StabilityGrid::unstable_fraction() const {
  if (classes.empty()) return 0.0;
  std::size_t bad = 0;
  for (auto c : classes) bad += c != StabilityClass::stable;
  return static_cast<double>(bad) / static_cast<double>(classes.size());
}

StabilityGrid region_grid(const MethodSpec& method, GridAxis k1, GridAxis k2,
                          RepartitionAngle rep, unsigned workers) {
  if (k1.count == 0 || k2.count == 0) throw std::invalid_argument("region_grid: zero resolution");
  if (k1.lo < 0.0 || k1.hi < k1.lo || k2.hi < k2.lo)
    throw std::invalid_argument("region_grid: invalid window");
  StabilityGrid grid;
  grid.k1.resize(k1.count);
  grid.k2.resize(k2.count);
  for (std::size_t i = 0; i < k1.count; ++i) grid.k1[i] = k1.at(i);
  for (std::size_t j = 0; j < k2.count; ++j) grid.k2[j] = k2.at(j);
  grid.abs_r.resize(static_cast<Eigen::Index>(k1.count), static_cast<Eigen::Index>(k2.count));
  grid.classes.assign(k1.count * k2.count, StabilityClass::stable);

  parallel_for(
      k1.count,
      [&](std::size_t i) {
        for (std::size_t j = 0; j < k2.count; ++j) {
          const DahlquistPoint p{grid.k1[i], grid.k2[j]};
          StabilityClass cls;
          double value;
          if (method.is_block()) {
            const auto pb = power_bounded_classification(epbm_transfer_matrix(p, rep));
            value = pb.spectral_radius;
            cls = pb.classification;
          } else {
            value = std::abs(stability_scalar(method, p, rep));
            cls = classify_amplification(value);
          }
          grid.abs_r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
          grid.classes[i * k2.count + j] = cls;
        }
      },
      workers);
  return grid;
}

void write_grid_csv(std::ostream& os, const StabilityGrid& grid) {
  const auto old_precision = os.precision();
  os << std::setprecision(17);
  os << "k1,k2,absR,class\n";
  for (std::size_t i = 0; i < grid.k1.size(); ++i)
    for (std::size_t j = 0; j < grid.k2.size(); ++j)
      os << grid.k1[i] << ',' << grid.k2[j] << ','
         << grid.abs_r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << ','
         << class_name(grid.class_at(i, j)) << '\n';
  os.precision(old_precision);
}

std::vector<double> asymptotic_decay(std::span<const double> poly_coeffs,
                                     std::span<const double> k1_list) {
  if (poly_coeffs.empty()) throw std::invalid_argument("asymptotic_decay: empty polynomial");
  std::vector<double> out;
  out.reserve(k1_list.size());
  for (double k1 : k1_list) {
    if (k1 == 0.0) throw std::invalid_argument("asymptotic_decay: k1 must be nonzero");
    const Complex a(0.0, k1);
    const Complex decay = std::exp(-a);
    // Σ_m (−1)^m (p^(m)(1) − e^{−a} p^(m)(0)) / a^{m+1}
    std::vector<double> coeffs(poly_coeffs.begin(), poly_coeffs.end());
    Complex total(0.0, 0.0);
    Complex a_power = a;
    double sign = 1.0;
    while (!coeffs.empty()) {
      double at_one = 0.0;
      for (double c : coeffs) at_one += c;
      total += sign * (at_one - decay * coeffs.front()) / a_power;
      std::vector<double> derivative;
      for (std::size_t m = 1; m < coeffs.size(); ++m)
        derivative.push_back(static_cast<double>(m) * coeffs[m]);
      coeffs = std::move(derivative);
      a_power *= a;
      sign = -sign;
    }
    out.push_back(std::abs(total));
  }
  return out;
}

double default_k2_extent(MethodFamily family) {
  switch (family) {
    case MethodFamily::ERK4: return 12.0;
    case MethodFamily::ESDC6: return 25.0;
    case MethodFamily::EPBM5: return 4.0;
    default: return 4.0;
  }
}

bool splits_along_axis(const MethodSpec& method, GridAxis k1, RepartitionAngle rep) {
  const auto row = region_grid(method, k1, GridAxis{0.0, 0.0, 1}, rep, 1);
  for (std::size_t i = 0; i < row.k1.size(); ++i)
    if (row.k1[i] > 0.0 && row.class_at(i, 0) != StabilityClass::stable) return true;
  return false;
}

double critical_split_angle(const MethodSpec& method, GridAxis k1, double rho_step,
                            double rho_max) {
  if (!(rho_step > 0.0)) throw std::invalid_argument("critical_split_angle: step must be > 0");
  double previous = 0.0;
  for (double rho = rho_step; rho <= rho_max + 1e-15 && rho < std::numbers::pi / 2;
       rho += rho_step) {
    if (splits_along_axis(method, k1, RepartitionAngle::from_rho(rho))) {
      double lo = previous, hi = rho;
      for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (splits_along_axis(method, k1, RepartitionAngle::from_rho(mid)))
          hi = mid;
        else
          lo = mid;
      }
      return hi;
    }
    previous = rho;
  }
  return -1.0;
}

}  // namespace expstab
