#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace expstab {

enum class MethodFamily { ERK4, ESDC6, EPBM5, IMRK4, RK4, ExpEuler };

std::string_view method_name(MethodFamily family);
/// Case-insensitive; throws std::invalid_argument on unknown names.
MethodFamily parse_method(std::string_view name);

/// True for methods that treat the linear part through φ-functions.
bool is_exponential(MethodFamily family);
/// Nominal order of accuracy.
int method_order(MethodFamily family);

/// Four Gauss–Lobatto nodes on [0, 1] with per-substep exponential
/// quadrature weights.
struct EsdcTableau {
  static constexpr int kNodes = 4;
  static constexpr int kSubsteps = kNodes - 1;

  std::array<double, kNodes> nodes{};
  int sweeps = 6;
  /// Substep length divided by the full step.
  std::array<double, kSubsteps> substep_fraction{};
  /// tau[j](i) = (node_i − node_j) / (node_{j+1} − node_j).
  std::array<Eigen::Vector4d, kSubsteps> tau{};
  /// V(j)_{c,d} = tau[j](c)^(d−1).
  std::array<Eigen::Matrix4d, kSubsteps> vandermonde{};
  /// weights[j](nu−1, l) = (nu−1)!·V(j)⁻¹(nu−1, l); b_nu = Σ_l weights(nu−1, l)·N_l.
  std::array<Eigen::Matrix4d, kSubsteps> weights{};

  static EsdcTableau make(int sweeps = 6);
};

/// Composite fifth-order exponential polynomial block method: one Legendre
/// endpoint plus four Gauss–Legendre nodes on [−1, 1].
struct EpbmTableau {
  static constexpr int kNodes = 5;

  std::array<double, kNodes> nodes{};
  double eta_plus = 0.0;
  double eta_minus = 0.0;

  double w1p = 0, w1m = 0, w2p = 0, w2m = 0, w3p = 0, w3m = 0, w4p = 0, w4m = 0;
  double u1p = 0, u1m = 0, u2 = 0;

  /// Maps (N_2..N_5) to (v_1..v_4); built from the interpolation Vandermonde.
  Eigen::Matrix4d v_map;
  /// Same mapping assembled from the surd constants above.
  Eigen::Matrix4d v_map_closed_form;

  /// η_j(α) = z_j + α + 1.
  double eta(int j, double alpha) const { return nodes[j] + alpha + 1.0; }

  static EpbmTableau make();
};

/// Additive Runge–Kutta pair ARK4(3)6L[2]SA (ESDIRK implicit, ERK explicit).
struct ButcherPair {
  static constexpr int kStages = 6;
  Eigen::Matrix<double, kStages, kStages> implicit_a;
  Eigen::Matrix<double, kStages, kStages> explicit_a;
  Eigen::Matrix<double, kStages, 1> b;
  Eigen::Matrix<double, kStages, 1> c;
  double gamma = 0.25;

  static ButcherPair make_ark4();
};

struct MethodSpec {
  MethodFamily family = MethodFamily::ERK4;
  std::optional<EsdcTableau> esdc;
  std::optional<EpbmTableau> epbm;
  std::optional<ButcherPair> imex;

  static MethodSpec make(MethodFamily family);
  std::string_view name() const { return method_name(family); }
  bool is_block() const { return family == MethodFamily::EPBM5; }
};

}  // namespace expstab
