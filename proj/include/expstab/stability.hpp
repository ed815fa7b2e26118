#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "expstab/methods.hpp"

namespace expstab {

/// k1 = h·λ1 (treated exponentially), k2 = h·λ2 (treated explicitly).
struct DahlquistPoint {
  double k1 = 0.0;
  double k2 = 0.0;
};

/// Rotation of the linear eigenvalue by rho radians into the left half-plane.
/// epsilon = tan(rho).
class RepartitionAngle {
 public:
  RepartitionAngle() = default;
  static RepartitionAngle from_rho(double rho);
  static RepartitionAngle none() { return {}; }

  double rho() const { return rho_; }
  double epsilon() const { return epsilon_; }

 private:
  double rho_ = 0.0;
  double epsilon_ = 0.0;
};

/// Linear part ik1 − ε|k1| and explicit part ik2 + ε|k1| for unit step.
std::complex<double> repartitioned_linear(DahlquistPoint p, RepartitionAngle rep);
std::complex<double> repartitioned_explicit(DahlquistPoint p, RepartitionAngle rep);

/// One literal step of a one-step method on the scalar partitioned problem
/// with y0 = 1. Throws std::invalid_argument for the block method.
std::complex<double> stability_scalar(const MethodSpec& method, DahlquistPoint p,
                                      RepartitionAngle rep = {});

using TransferMatrix = Eigen::MatrixXcd;

/// Single pass of the block method (alpha = 1 or 0) as a 5×5 matrix.
TransferMatrix epbm_pass_matrix(DahlquistPoint p, RepartitionAngle rep, double alpha);
/// Composite block step matrix, assembled from canonical basis inputs.
TransferMatrix epbm_transfer_matrix(DahlquistPoint p, RepartitionAngle rep);
/// 1×1 for one-step methods, 5×5 for the block method.
TransferMatrix transfer_matrix(const MethodSpec& method, DahlquistPoint p,
                               RepartitionAngle rep = {});

enum class StabilityClass { stable, marginal, unstable };
std::string_view class_name(StabilityClass c);

/// Band edges for classifying an amplification factor.
inline constexpr double kStableTolerance = 1e-10;
inline constexpr double kExtendedBand = 1.01;

StabilityClass classify_amplification(double abs_r);

struct PowerBoundedness {
  StabilityClass classification = StabilityClass::stable;
  double spectral_radius = 0.0;
  /// Spectral radius was close to one and the powering check ran.
  bool powered = false;
  /// Eigen-solver did not converge.
  bool solver_failed = false;
};

/// Spectral-radius classification; when the radius lies within tol of one,
/// M is powered 10⁴ times and must keep its max-norm within 10× of ‖M‖.
PowerBoundedness power_bounded_classification(const TransferMatrix& m, double tol = 1e-8);

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;

  double at(std::size_t i) const;
};

struct StabilityGrid {
  std::vector<double> k1;
  std::vector<double> k2;
  /// absR(i, j) at (k1[i], k2[j]).
  Eigen::MatrixXd abs_r;
  std::vector<StabilityClass> classes;  // row-major, k1 outer

  StabilityClass class_at(std::size_t i, std::size_t j) const { return classes[i * k2.size() + j]; }
  /// Fraction of nodes outside the stable band.
  double unstable_fraction() const;
};

/// |R̂| (one-step methods) or spectral radius of M (block method) over the
/// grid; rows and columns ascending. Parallel over k1 rows.
StabilityGrid region_grid(const MethodSpec& method, GridAxis k1, GridAxis k2,
                          RepartitionAngle rep = {}, unsigned workers = 0);

/// CSV with header k1,k2,absR,class; k1 outer, 17 significant digits.
void write_grid_csv(std::ostream& os, const StabilityGrid& grid);

/// |∫₀¹ e^{ik1(s−1)} p(s) ds| per k1, with p given by ascending coefficients.
/// Closed form via repeated integration by parts.
std::vector<double> asymptotic_decay(std::span<const double> poly_coeffs,
                                     std::span<const double> k1_list);

/// Default k2 window for region plots.
double default_k2_extent(MethodFamily family);

/// True when some node on the k2 = 0 line with k1 > 0 falls outside the
/// stable band, separating the stable set along that line.
bool splits_along_axis(const MethodSpec& method, GridAxis k1, RepartitionAngle rep);

/// Smallest rho on the scan grid (rho_step, 2·rho_step, ... ≤ rho_max) at
/// which the region splits; negative when no split is found.
double critical_split_angle(const MethodSpec& method, GridAxis k1, double rho_step,
                            double rho_max);

}  // namespace expstab
