#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "expstab/fft.hpp"
#include "expstab/spectral.hpp"
#include "oracles.hpp"

using namespace expstab;
using cd = std::complex<double>;

namespace {

const double kPi = std::numbers::pi;

ComplexVector<> random_spectrum(std::mt19937_64& rng, std::size_t n, bool drop_nyquist = true) {
  std::normal_distribution<double> g;
  ComplexVector<> v(static_cast<Eigen::Index>(n));
  for (auto& c : v) c = cd(g(rng), g(rng));
  if (drop_nyquist) v(static_cast<Eigen::Index>(n / 2)) = 0.0;
  return v;
}

// Spectrum of a real field: conjugate symmetric, decaying with |mode|.
ComplexVector<> real_field_spectrum(std::mt19937_64& rng, const PeriodicGrid& grid) {
  std::normal_distribution<double> g;
  const auto n = static_cast<Eigen::Index>(grid.nx);
  ComplexVector<> v = ComplexVector<>::Zero(n);
  for (Eigen::Index j = 1; j < n / 3; ++j) {
    const cd c = cd(g(rng), g(rng)) * std::exp(-0.1 * static_cast<double>(j));
    v(j) = c;
    v(n - j) = std::conj(c);
  }
  v(0) = g(rng);
  return v;
}

double max_abs(const ComplexVector<>& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("fft round trip and scaling") {
  FourierTransform fft(24);
  std::mt19937_64 rng(7);
  const ComplexVector<> x = random_spectrum(rng, 24, false);
  CHECK(max_abs(fft.inverse(fft.forward(x)) - x) < 1e-14);
  const ComplexVector<> ones = ComplexVector<>::Ones(24);
  CHECK(std::abs(fft.forward(ones)(0) - 24.0) < 1e-13);
  CHECK_THROWS_AS(fft.forward(ComplexVector<>::Ones(5)), std::invalid_argument);
  ComplexVector<> same = x;
  CHECK_THROWS_AS(fft.forward(same, same), std::invalid_argument);
}

TEST_CASE("dealiased product equals the truncated convolution") {
  std::mt19937_64 rng(42);
  const auto grid = PeriodicGrid::make(16, 0.0, 2.0 * kPi);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexVector<> u = random_spectrum(rng, 16), v = random_spectrum(rng, 16);
    const ComplexVector<> got = dealiased_product(grid, u, v);
    const auto want = oracle::truncated_convolution({u.begin(), u.end()}, {v.begin(), v.end()});
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
      err = std::max(err, std::abs(got(static_cast<Eigen::Index>(i)) - want[i]));
      scale = std::max(scale, std::abs(want[i]));
    }
    CHECK(err <= 1e-12 * scale);
  }
}

TEST_CASE("products beyond the band vanish") {
  const auto grid = PeriodicGrid::make(8, 0.0, 2.0 * kPi);
  ComplexVector<> u = ComplexVector<>::Zero(8);
  u(3) = 8.0;
  CHECK(max_abs(dealiased_product(grid, u, u)) < 1e-14);
}

TEST_CASE("retained band output") {
  std::mt19937_64 rng(3);
  Dealiaser d(48);
  const ComplexVector<> u = random_spectrum(rng, 48), v = random_spectrum(rng, 48);
  const ComplexVector<> full = d.product(u, v);
  const ComplexVector<> kept = d.product(u, v, OutputBand::retained);
  for (Eigen::Index i = 0; i < 48; ++i) {
    const long j = i <= 24 ? i : i - 48;
    if (std::abs(j) <= 16)
      CHECK(kept(i) == full(i));
    else
      CHECK(kept(i) == 0.0);
  }
  CHECK(d.retained_modes() == 16);
}

TEST_CASE("zds problem") {
  const auto sp = build_zds(128);
  SUBCASE("initial spectrum has two modes") {
    int nonzero = 0;
    for (Eigen::Index i = 0; i < 128; ++i) nonzero += std::abs(sp.initial(i)) > 1e-12;
    CHECK(nonzero == 2);
    CHECK(std::abs(sp.initial(0) - 128.0) < 1e-12);
    CHECK(std::abs(std::abs(sp.initial(3)) - 1.28) < 1e-12);
    CHECK(sp.grid.wavenumbers(3) == doctest::Approx(0.75));
  }
  SUBCASE("nonlinearity of the constant state") {
    ComplexVector<> one = ComplexVector<>::Zero(128);
    one(0) = 128.0;
    ComplexVector<> n = sp.problem.nonlinear(0.0, one);
    CHECK(std::abs(n(0) - cd(0, 256.0)) < 1e-11);
    n(0) = 0.0;
    CHECK(max_abs(n) < 1e-11);
  }
  SUBCASE("spectral radius on the retained band") {
    CHECK(spectral_radius_fraction(sp.problem.linear, 0.02, 2.0 / 3.0) ==
          doctest::Approx(23.1525).epsilon(5e-5 / 23.1525));
    CHECK(spectral_radius_fraction(sp.problem.linear, 0.02, 1.0) ==
          doctest::Approx(81.92).epsilon(1e-12));
    CHECK(sp.grid.largest_retained_index() == 42);
  }
  CHECK_THROWS_AS(build_zds(16), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicGrid::make(96, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("kdv problem") {
  const auto sp = build_kdv(256);
  std::mt19937_64 rng(11);
  SUBCASE("initial cosine") {
    CHECK(std::abs(sp.initial(1) - 128.0) < 1e-12);
    CHECK(std::abs(sp.initial(255) - 128.0) < 1e-12);
    CHECK(sp.grid.wavenumbers(1) == doctest::Approx(kPi));
  }
  SUBCASE("nonlinearity of cos(pi x) lives at k = 0 and ±2π only") {
    const ComplexVector<> n = sp.problem.nonlinear(0.0, sp.initial);
    CHECK(std::abs(n(0)) == 0.0);
    CHECK(std::abs(n(2)) > 1.0);
    ComplexVector<> rest = n;
    rest(2) = rest(254) = 0.0;
    CHECK(max_abs(rest) < 1e-12 * max_abs(n));
    // −½ik·F(cos²) at k = 2π: F(cos²) has N/4 there.
    CHECK(std::abs(n(2) - cd(0, -0.5 * 2 * kPi) * 64.0) < 1e-10);
  }
  SUBCASE("conjugate symmetry and zero mean") {
    for (int trial = 0; trial < 20; ++trial) {
      const ComplexVector<> u = real_field_spectrum(rng, sp.grid);
      const ComplexVector<> n = sp.problem.nonlinear(0.0, u);
      CHECK(n(0) == 0.0);
      double asym = 0.0;
      for (Eigen::Index j = 1; j < 128; ++j) asym = std::max(asym, std::abs(n(j) - std::conj(n(256 - j))));
      CHECK(asym <= 1e-12 * max_abs(n));
    }
  }
}

TEST_CASE("repartitioning is an exact rewrite") {
  std::mt19937_64 rng(5);
  for (const auto& sp : {build_zds(64), build_kdv(64)}) {
    for (const auto& spec : {RepartitionSpec::angle(RepartitionKind::abs_k3, kPi / 64),
                             RepartitionSpec::angle(RepartitionKind::k2, kPi / 3),
                             RepartitionSpec::identity(16.0)}) {
      const auto q = apply_repartition(sp, spec);
      for (int trial = 0; trial < 50; ++trial) {
        ComplexVector<> u = random_spectrum(rng, 64) * 0.1;
        const ComplexVector<> a = sp.problem.eval_full(0.0, u), b = q.eval_full(0.0, u);
        CHECK(max_abs(a - b) <= 1e-12 * max_abs(a));
      }
    }
  }
}

TEST_CASE("repartition operators") {
  const auto zds = build_zds(128);
  SUBCASE("identity") {
    const auto q = apply_repartition(zds, RepartitionSpec::identity(8.0));
    for (Eigen::Index i = 0; i < 128; ++i) CHECK(q.linear(i).real() == -8.0);
    const auto same = apply_repartition(zds, RepartitionSpec::identity(0.0));
    CHECK(same.linear == zds.problem.linear);
  }
  SUBCASE("third order rotates every mode by rho") {
    for (const auto& sp : {zds, build_kdv(128)}) {
      const auto q = apply_repartition(sp, RepartitionSpec::angle(RepartitionKind::abs_k3, kPi / 64));
      for (Eigen::Index i = 1; i < 40; ++i)
        CHECK(std::arg(q.linear(i)) == doctest::Approx(kPi / 2 + kPi / 64).epsilon(1e-12));
    }
  }
  SUBCASE("second order rotates |k| = 1 by rho, less above, more below") {
    const auto q = apply_repartition(zds, RepartitionSpec::angle(RepartitionKind::k2, kPi / 3));
    CHECK(zds.grid.wavenumbers(4) == 1.0);
    CHECK(std::arg(q.linear(4)) == doctest::Approx(kPi / 2 + kPi / 3).epsilon(1e-12));
    CHECK(std::arg(q.linear(40)) < kPi / 2 + kPi / 3);
    CHECK(std::arg(q.linear(2)) > kPi / 2 + kPi / 3);
  }
  SUBCASE("explicit epsilon wins") {
    RepartitionSpec s = RepartitionSpec::angle(RepartitionKind::k2, kPi / 3);
    s.epsilon = 2.5;
    CHECK(repartition_operator(zds, s).epsilon == 2.5);
  }
  CHECK_THROWS_AS(repartition_operator(zds, RepartitionSpec::angle(RepartitionKind::abs_k3, 2.0)),
                  std::invalid_argument);
  CHECK(parse_repartition_kind("k2") == RepartitionKind::k2);
  CHECK(repartition_kind_name(RepartitionKind::abs_k3) == "abs_k3");
}

TEST_CASE("hyperviscosity") {
  const auto sp = build_zds(64);
  const HyperviscositySpec spec{8, 1e10, 4};
  const auto a = apply_hyperviscosity(sp, spec, 0.02);
  const auto b = apply_hyperviscosity(sp, spec, 0.01);
  for (Eigen::Index i = 1; i < 64; ++i) {
    const double da = (a.linear(i) - sp.problem.linear(i)).real();
    const double db = (b.linear(i) - sp.problem.linear(i)).real();
    CHECK(da < 0.0);
    CHECK(da / db == doctest::Approx(32.0).epsilon(1e-12));
  }
  CHECK(hyperviscosity_operator(sp.grid, spec).diffusive(4).real() == doctest::Approx(-1.0));
  CHECK_THROWS_AS(hyperviscosity_operator(sp.grid, {3, 1.0, 4}), std::invalid_argument);
  CHECK(spec.describe().find(',') == std::string::npos);
}
