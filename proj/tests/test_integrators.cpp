#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "expstab/integrators.hpp"

using namespace expstab;
using cd = std::complex<double>;

namespace {

// y' = iλ1·y + iλ2·y, λ1 exponential, λ2 explicit.
SemilinearProblem<> split_dahlquist(double l1, double l2) {
  SemilinearProblem<> p;
  p.linear = ComplexVector<>::Constant(1, cd(0, l1));
  p.nonlinear = [l2](double, const ComplexVector<>& y) { return ComplexVector<>(cd(0, l2) * y); };
  return p;
}

// y' = iλ·y + i|y|²y: modulus is conserved, so y(t) = y0·exp(i(λ + |y0|²)t).
SemilinearProblem<> cubic_phase(double l) {
  SemilinearProblem<> p;
  p.linear = ComplexVector<>::Constant(1, cd(0, l));
  p.nonlinear = [](double, const ComplexVector<>& y) {
    return ComplexVector<>(cd(0, 1) * y.cwiseAbs2().cwiseProduct(y));
  };
  return p;
}

double final_error(const SemilinearProblem<>& p, MethodFamily m, std::size_t n, cd exact,
                   double t1 = 1.0, cd y0 = 1.0) {
  const auto r = integrate(p, MethodSpec::make(m), ComplexVector<>(ComplexVector<>::Constant(1, y0)), 0.0, t1, n);
  REQUIRE_FALSE(r.diverged());
  return std::abs(r.y(0) - exact);
}

double slope(const SemilinearProblem<>& p, MethodFamily m, std::size_t n, cd exact,
             double t1 = 1.0, cd y0 = 1.0) {
  const double e1 = final_error(p, m, n, exact, t1, y0);
  const double e2 = final_error(p, m, 2 * n, exact, t1, y0);
  return std::log(e1 / e2) / std::log(2.0);
}

}  // namespace

TEST_CASE("orders on the split Dahlquist equation") {
  const auto p = split_dahlquist(6.0, 2.0);
  const cd exact = std::exp(cd(0, 8.0));
  CHECK(slope(p, MethodFamily::ERK4, 40, exact) >= 3.8);
  CHECK(slope(p, MethodFamily::ESDC6, 20, exact) >= 5.7);
  CHECK(slope(p, MethodFamily::EPBM5, 20, exact) >= 4.7);
  CHECK(slope(p, MethodFamily::IMRK4, 40, exact) >= 3.8);
  CHECK(slope(p, MethodFamily::RK4, 40, exact) >= 3.8);
  CHECK(slope(p, MethodFamily::ExpEuler, 200, exact) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("orders on a nonlinear phase equation") {
  const auto p = cubic_phase(5.0);
  const cd y0(0.6, 0.5);
  const cd exact = y0 * std::exp(cd(0, (5.0 + std::norm(y0)) * 2.0));
  CHECK(slope(p, MethodFamily::ERK4, 40, exact, 2.0, y0) >= 3.8);
  CHECK(slope(p, MethodFamily::ESDC6, 20, exact, 2.0, y0) >= 5.7);
  CHECK(slope(p, MethodFamily::EPBM5, 20, exact, 2.0, y0) >= 4.7);
  CHECK(slope(p, MethodFamily::IMRK4, 40, exact, 2.0, y0) >= 3.8);
}

TEST_CASE("exponential methods are exact on the linear part") {
  const auto p = split_dahlquist(73.0, 0.0);
  for (auto m : {MethodFamily::ERK4, MethodFamily::ESDC6, MethodFamily::ExpEuler})
    CHECK(final_error(p, m, 10, std::exp(cd(0, 73.0))) < 1e-13);
  // The block method carries the error of its RK4-substepped startup.
  CHECK(final_error(p, MethodFamily::EPBM5, 10, std::exp(cd(0, 73.0))) < 1e-9);
}

TEST_CASE("ERK4 with L = 0 reduces to classical RK4") {
  auto p = cubic_phase(0.0);
  const ComplexVector<> y0 = ComplexVector<>::Constant(1, cd(0.3, -0.8));
  const auto a = integrate(p, MethodSpec::make(MethodFamily::ERK4), y0, 0.0, 1.0, 7);
  const auto b = integrate(p, MethodSpec::make(MethodFamily::RK4), y0, 0.0, 1.0, 7);
  CHECK(std::abs(a.y(0) - b.y(0)) < 1e-14);
}

TEST_CASE("zero repartition is bitwise identical") {
  const auto p = cubic_phase(30.0);
  const ComplexVector<> y0 = ComplexVector<>::Constant(1, cd(0.3, -0.8));
  IntegrateOptions<> opt;
  opt.repartition = DiagonalRepartition<>{ComplexVector<>::Constant(1, -30.0), 0.0};
  for (auto m : {MethodFamily::ERK4, MethodFamily::ESDC6, MethodFamily::EPBM5, MethodFamily::IMRK4}) {
    const auto a = integrate(p, MethodSpec::make(m), y0, 0.0, 1.0, 9);
    const auto b = integrate(p, MethodSpec::make(m), y0, 0.0, 1.0, 9, opt);
    CHECK(a.y(0) == b.y(0));
  }
}

TEST_CASE("repartitioning leaves the equation unchanged") {
  const auto p = cubic_phase(30.0);
  DiagonalRepartition<> rep{ComplexVector<>::Constant(1, -30.0), 0.4};
  const auto q = repartitioned(p, rep);
  const ComplexVector<> y = ComplexVector<>::Constant(1, cd(0.2, 0.9));
  CHECK(std::abs((q.eval_full(0.0, y) - p.eval_full(0.0, y))(0)) < 1e-13);
  CHECK(q.linear(0) == cd(-12.0, 30.0));
}

TEST_CASE("hyperviscosity scales with the step") {
  SemilinearProblem<> p = split_dahlquist(1.0, 0.0);
  DiagonalHyperviscosity<> hv{ComplexVector<>::Constant(1, -2.0), 3.0, 4};
  const auto q = hyperviscous(p, hv, 0.1);
  CHECK(q.linear(0).real() == doctest::Approx(-2.0 * 3.0 * 1e-5).epsilon(1e-14));
  CHECK(hyperviscous(p, DiagonalHyperviscosity<>{hv.diffusive, 0.0, 4}, 0.1).linear(0) == p.linear(0));
}

TEST_CASE("samples and blowup") {
  const auto p = split_dahlquist(0.0, 1.0);
  IntegrateOptions<> opt;
  opt.sample_steps = {0, 5, 10};
  const auto r = integrate(p, MethodSpec::make(MethodFamily::RK4), ComplexVector<>(ComplexVector<>::Ones(1)), 0.0,
                           1.0, 10, opt);
  REQUIRE(r.samples.size() == 3);
  CHECK(r.samples[1].step == 5);
  CHECK(r.samples[1].t == doctest::Approx(0.5));
  CHECK(r.samples[2].t == 1.0);

  // RK4 far outside its stability interval.
  const auto stiff = split_dahlquist(0.0, 400.0);
  const auto b = integrate(stiff, MethodSpec::make(MethodFamily::RK4), ComplexVector<>(ComplexVector<>::Ones(1)), 0.0,
                           10.0, 100);
  CHECK(b.diverged());
  CHECK(b.steps_completed + 1 == *b.blowup_step);
}

TEST_CASE("integrate rejects bad arguments") {
  const auto p = split_dahlquist(1.0, 1.0);
  const auto m = MethodSpec::make(MethodFamily::ERK4);
  const ComplexVector<> y0 = ComplexVector<>::Ones(1);
  CHECK_THROWS_AS(integrate(p, m, y0, 0.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(integrate(p, m, y0, 1.0, 1.0, 5), std::invalid_argument);
  IntegrateOptions<> both;
  both.repartition = DiagonalRepartition<>{ComplexVector<>::Ones(1), 1.0};
  both.hyperviscosity = DiagonalHyperviscosity<>{ComplexVector<>::Ones(1), 1.0, 4};
  CHECK_THROWS_AS(integrate(p, m, y0, 0.0, 1.0, 5, both), std::invalid_argument);
}
