#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "expstab/fft.hpp"
#include "expstab/problem.hpp"

namespace expstab {

/// Uniform periodic grid on [a, b) with wavenumbers in transform order
/// (0, 1, ..., Nx/2, −Nx/2+1, ..., −1) scaled by 2π/(b − a).
struct PeriodicGrid {
  std::size_t nx = 0;
  double a = 0.0;
  double b = 0.0;
  Eigen::VectorXd wavenumbers;

  /// Nx must be a power of two and at least 8.
  static PeriodicGrid make(std::size_t nx, double a, double b);

  double length() const { return b - a; }
  double spacing() const { return 2.0 * std::numbers::pi / length(); }
  /// Signed mode number of transform index i.
  long mode(std::size_t i) const;
  /// Transform index of the largest mode kept by the 3/2 rule.
  std::size_t largest_retained_index() const { return nx / 3; }
  double x(std::size_t m) const { return a + length() * static_cast<double>(m) / static_cast<double>(nx); }
};

/// Output modes kept after a padded product: all of |mode| < Nx/2, or only
/// the retained band |mode| ≤ ⌊Nx/3⌋.
enum class OutputBand { full, retained };

/// Products of spectra by 3/2 zero-padding. The Nyquist mode is dropped on
/// input and output.
class Dealiaser {
 public:
  explicit Dealiaser(std::size_t nx);

  std::size_t size() const { return nx_; }
  std::size_t padded_size() const { return padded_; }
  std::size_t retained_modes() const { return nx_ / 3; }

  /// Physical values of û on the padded grid.
  ComplexVector<> to_padded_physical(const ComplexVector<>& u_hat) const;
  /// Spectrum of a padded physical field, restricted to `band`.
  ComplexVector<> from_padded_physical(const ComplexVector<>& w,
                                       OutputBand band = OutputBand::full) const;

  ComplexVector<> product(const ComplexVector<>& u_hat, const ComplexVector<>& v_hat,
                          OutputBand band = OutputBand::full) const;

 private:
  std::size_t nx_;
  std::size_t padded_;
  std::shared_ptr<const FourierTransform> fft_;
};

ComplexVector<> dealiased_product(const PeriodicGrid& grid, const ComplexVector<>& u_hat,
                                  const ComplexVector<>& v_hat);

struct SpectralProblem {
  std::string name;
  PeriodicGrid grid;
  SemilinearProblem<> problem;
  ComplexVector<> initial;
  /// c in L = diag(i c k³).
  double dispersion = 1.0;
};

/// u_t = −u_xxx + 2i|u|²u on [−4π, 4π); u₀ = 1 + exp(3ix/4)/100.
SpectralProblem build_zds(std::size_t nx);

/// u_t = −(δu_xxx + ½(u²)_x) on [0, 2); u₀ = cos(πx).
SpectralProblem build_kdv(std::size_t nx, double delta = 0.022);

/// Builds "zds" or "kdv" by name.
SpectralProblem build_problem(const std::string& name, std::size_t nx);

/// Spectrum (unscaled forward-transform convention) of Σ c·exp(i k x) for
/// modes given as (signed mode number, coefficient) pairs.
ComplexVector<> spectrum_of_modes(const PeriodicGrid& grid,
                                  std::initializer_list<std::pair<long, Complex>> modes);

enum class RepartitionKind { abs_k3, k2, identity };

std::string repartition_kind_name(RepartitionKind kind);
RepartitionKind parse_repartition_kind(const std::string& name);

/// Diffusive D with its scaling ε. abs_k3 and k2 take an angle ρ; identity
/// takes ε directly. A raw ε overrides the angle rule for any kind.
struct RepartitionSpec {
  RepartitionKind kind = RepartitionKind::abs_k3;
  double rho = 0.0;
  std::optional<double> epsilon;

  static RepartitionSpec angle(RepartitionKind kind, double rho);
  static RepartitionSpec identity(double epsilon);

  /// Short label for CSV output, e.g. "abs_k3:rho=0.0245".
  std::string describe() const;
};

/// D and ε for a problem. D is −|k|³, −k² or −1. Unless ε is given, it is
/// tan ρ scaled by the dispersion coefficient, so the eigenvalue at |k| = 1
/// is rotated by exactly ρ (every eigenvalue, for −|k|³).
DiagonalRepartition<> repartition_operator(const SpectralProblem& sp, const RepartitionSpec& spec);

SemilinearProblem<> apply_repartition(const SpectralProblem& sp, const RepartitionSpec& spec);

/// D̃ = −diag(k^m) scaled by dt^(q+1)·γ.
struct HyperviscositySpec {
  int m = 8;
  double gamma = 0.0;
  int q = 4;

  std::string describe() const;
};

DiagonalHyperviscosity<> hyperviscosity_operator(const PeriodicGrid& grid, const HyperviscositySpec& spec);

SemilinearProblem<> apply_hyperviscosity(const SpectralProblem& sp, const HyperviscositySpec& spec,
                                         double dt);

/// max |h·l_i| over transform indices with |mode| ≤ ⌊fraction·Nx/2⌋.
double spectral_radius_fraction(const ComplexVector<>& linear, double h, double fraction);

/// Discrete ∫|u|² (up to the constant grid factor) of a spectrum.
double spectral_power(const ComplexVector<>& u_hat);

}  // namespace expstab
