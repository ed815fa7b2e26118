#include "expstab/methods.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace expstab {

namespace {

struct NamedFamily {
  MethodFamily family;
  std::string_view name;
};

constexpr std::array<NamedFamily, 6> kFamilies{{
    {MethodFamily::ERK4, "ERK4"},
    {MethodFamily::ESDC6, "ESDC6"},
    {MethodFamily::EPBM5, "EPBM5"},
    {MethodFamily::IMRK4, "IMRK4"},
    {MethodFamily::RK4, "RK4"},
    {MethodFamily::ExpEuler, "EXPEULER"},
}};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace

std::string_view method_name(MethodFamily family) {
  for (const auto& f : kFamilies)
    if (f.family == family) return f.name;
  return "?";
}

MethodFamily parse_method(std::string_view name) {
  const std::string key = upper(name);
  for (const auto& f : kFamilies)
    if (f.name == key) return f.family;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

bool is_exponential(MethodFamily family) {
  return family == MethodFamily::ERK4 || family == MethodFamily::ESDC6 ||
         family == MethodFamily::EPBM5 || family == MethodFamily::ExpEuler;
}

int method_order(MethodFamily family) {
  switch (family) {
    case MethodFamily::ERK4: return 4;
    case MethodFamily::ESDC6: return 6;
    case MethodFamily::EPBM5: return 5;
    case MethodFamily::IMRK4: return 4;
    case MethodFamily::RK4: return 4;
    case MethodFamily::ExpEuler: return 1;
  }
  return 0;
}

EsdcTableau EsdcTableau::make(int sweeps) {
  EsdcTableau t;
  t.sweeps = sweeps;
  const double offset = std::sqrt(5.0) / 10.0;
  t.nodes = {0.0, 0.5 - offset, 0.5 + offset, 1.0};
  for (int j = 0; j < kSubsteps; ++j) {
    const double width = t.nodes[j + 1] - t.nodes[j];
    t.substep_fraction[j] = width;
    for (int i = 0; i < kNodes; ++i) t.tau[j](i) = (t.nodes[i] - t.nodes[j]) / width;
    for (int c = 0; c < kNodes; ++c)
      for (int d = 0; d < kNodes; ++d) t.vandermonde[j](c, d) = std::pow(t.tau[j](c), d);
    const Eigen::Matrix4d inverse = t.vandermonde[j].fullPivLu().inverse();
    double factorial = 1.0;
    for (int nu = 1; nu <= kNodes; ++nu) {
      t.weights[j].row(nu - 1) = factorial * inverse.row(nu - 1);
      factorial *= nu;
    }
  }
  return t;
}

EpbmTableau EpbmTableau::make() {
  EpbmTableau t;
  t.eta_plus = std::sqrt(3.0 / 7.0 + (2.0 / 7.0) * std::sqrt(6.0 / 5.0));
  t.eta_minus = std::sqrt(3.0 / 7.0 - (2.0 / 7.0) * std::sqrt(6.0 / 5.0));
  t.nodes = {-1.0, -t.eta_plus, -t.eta_minus, t.eta_minus, t.eta_plus};

  const double r30 = std::sqrt(30.0);
  t.w1p = std::sqrt(75.0 + 4.0 * r30) / 12.0;
  t.w1m = std::sqrt(75.0 - 4.0 * r30) / 12.0;
  t.w2p = std::sqrt(10170.0 + 1104.0 * r30) / 24.0;
  t.w2m = std::sqrt(10170.0 - 1104.0 * r30) / 24.0;
  t.w3p = 7.0 * std::sqrt(1350.0 + 180.0 * r30) / 24.0;
  t.w3m = 7.0 * std::sqrt(1350.0 - 180.0 * r30) / 24.0;
  t.w4p = 7.0 * std::sqrt(150.0 + 20.0 * r30) / 8.0;
  t.w4m = 7.0 * std::sqrt(150.0 - 20.0 * r30) / 8.0;
  t.u1p = (3.0 + r30) / 12.0;
  t.u1m = (3.0 - r30) / 12.0;
  t.u2 = 7.0 * r30 / 24.0;

  // v_k = p^(k−1)(0) for the cubic p(σ) through (z_i + 1, N_i), i = 2..5.
  Eigen::Matrix4d vandermonde;
  for (int i = 0; i < 4; ++i)
    for (int d = 0; d < 4; ++d) vandermonde(i, d) = std::pow(t.nodes[i + 1] + 1.0, d);
  const Eigen::Matrix4d inverse = vandermonde.fullPivLu().inverse();
  const Eigen::Vector4d factorials(1.0, 1.0, 2.0, 6.0);
  t.v_map = factorials.asDiagonal() * inverse;

  // Row 3, column 4 and row 4 carry sign/index fixes relative to the printed
  // constant matrix; the Vandermonde construction is authoritative.
  t.v_map_closed_form << t.w1p + t.u1p, -t.w1m + t.u1m, t.w1m + t.u1m, -t.w1p + t.u1p,
      -t.w2m - t.u2, t.w2p + t.u2, -t.w2p + t.u2, t.w2m - t.u2,
      t.w3m + t.u2, -t.w3p - t.u2, t.w3p - t.u2, -t.w3m + t.u2,
      -t.w4m, t.w4p, -t.w4p, t.w4m;
  return t;
}

ButcherPair ButcherPair::make_ark4() {
  ButcherPair p;
  p.gamma = 0.25;
  p.c << 0.0, 0.5, 83.0 / 250.0, 31.0 / 50.0, 17.0 / 20.0, 1.0;
  p.b << 82889.0 / 524892.0, 0.0, 15625.0 / 83664.0, 69875.0 / 102672.0, -2260.0 / 8211.0,
      0.25;

  auto& ai = p.implicit_a;
  ai.setZero();
  ai(1, 0) = 0.25;
  ai(1, 1) = 0.25;
  ai(2, 0) = 8611.0 / 62500.0;
  ai(2, 1) = -1743.0 / 31250.0;
  ai(2, 2) = 0.25;
  ai(3, 0) = 5012029.0 / 34652500.0;
  ai(3, 1) = -654441.0 / 2922500.0;
  ai(3, 2) = 174375.0 / 388108.0;
  ai(3, 3) = 0.25;
  ai(4, 0) = 15267082809.0 / 155376265600.0;
  ai(4, 1) = -71443401.0 / 120774400.0;
  ai(4, 2) = 730878875.0 / 902184768.0;
  ai(4, 3) = 2285395.0 / 8070912.0;
  ai(4, 4) = 0.25;
  ai.row(5) = p.b.transpose();

  auto& ae = p.explicit_a;
  ae.setZero();
  ae(1, 0) = 0.5;
  ae(2, 0) = 13861.0 / 62500.0;
  ae(2, 1) = 6889.0 / 62500.0;
  ae(3, 0) = -116923316275.0 / 2393684061468.0;
  ae(3, 1) = -2731218467317.0 / 15368042101831.0;
  ae(3, 2) = 9408046702089.0 / 11113171139209.0;
  ae(4, 0) = -451086348788.0 / 2902428689909.0;
  ae(4, 1) = -2682348792572.0 / 7519795681897.0;
  ae(4, 2) = 12662868775082.0 / 11960479115383.0;
  ae(4, 3) = 3355817975965.0 / 11060851509271.0;
  ae(5, 0) = 647845179188.0 / 3216320057751.0;
  ae(5, 1) = 73281519250.0 / 8382639484533.0;
  ae(5, 2) = 552539513391.0 / 3454668386233.0;
  ae(5, 3) = 3354512671639.0 / 8306763924573.0;
  ae(5, 4) = 4040.0 / 17871.0;
  return p;
}

MethodSpec MethodSpec::make(MethodFamily family) {
  MethodSpec spec;
  spec.family = family;
  if (family == MethodFamily::ESDC6) spec.esdc = EsdcTableau::make();
  if (family == MethodFamily::EPBM5) spec.epbm = EpbmTableau::make();
  if (family == MethodFamily::IMRK4) spec.imex = ButcherPair::make_ark4();
  return spec;
}

}  // namespace expstab
