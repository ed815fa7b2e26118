#include "expstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace expstab {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Transform index of signed mode j on a grid of length n.
std::size_t index_of(long j, std::size_t n) {
  return static_cast<std::size_t>(j >= 0 ? j : static_cast<long>(n) + j);
}

}  // namespace

PeriodicGrid PeriodicGrid::make(std::size_t nx, double a, double b) {
  if (nx < 8 || !is_power_of_two(nx))
    throw std::invalid_argument("grid: Nx must be a power of two >= 8");
  if (!(b > a)) throw std::invalid_argument("grid: empty domain");
  PeriodicGrid g;
  g.nx = nx;
  g.a = a;
  g.b = b;
  g.wavenumbers.resize(static_cast<Eigen::Index>(nx));
  for (std::size_t i = 0; i < nx; ++i)
    g.wavenumbers(static_cast<Eigen::Index>(i)) = g.spacing() * static_cast<double>(g.mode(i));
  return g;
}

long PeriodicGrid::mode(std::size_t i) const {
  const long n = static_cast<long>(nx);
  const long j = static_cast<long>(i);
  return j <= n / 2 ? j : j - n;
}

Dealiaser::Dealiaser(std::size_t nx)
    : nx_(nx), padded_(3 * nx / 2), fft_(std::make_shared<FourierTransform>(3 * nx / 2)) {
  if (nx < 8 || nx % 2 != 0) throw std::invalid_argument("dealiaser: Nx must be even and >= 8");
}

ComplexVector<> Dealiaser::to_padded_physical(const ComplexVector<>& u_hat) const {
  if (static_cast<std::size_t>(u_hat.size()) != nx_)
    throw std::invalid_argument("dealiaser: spectrum length mismatch");
  const long half = static_cast<long>(nx_ / 2);
  ComplexVector<> padded = ComplexVector<>::Zero(static_cast<Eigen::Index>(padded_));
  const double scale = static_cast<double>(padded_) / static_cast<double>(nx_);
  for (long j = -half + 1; j < half; ++j)
    padded(static_cast<Eigen::Index>(index_of(j, padded_))) =
        scale * u_hat(static_cast<Eigen::Index>(index_of(j, nx_)));
  return fft_->inverse(padded);
}

ComplexVector<> Dealiaser::from_padded_physical(const ComplexVector<>& w, OutputBand which) const {
  if (static_cast<std::size_t>(w.size()) != padded_)
    throw std::invalid_argument("dealiaser: padded length mismatch");
  const ComplexVector<> w_hat = fft_->forward(w);
  const long band = which == OutputBand::retained ? static_cast<long>(nx_ / 3)
                                                  : static_cast<long>(nx_ / 2) - 1;
  const double scale = static_cast<double>(nx_) / static_cast<double>(padded_);
  ComplexVector<> out = ComplexVector<>::Zero(static_cast<Eigen::Index>(nx_));
  for (long j = -band; j <= band; ++j)
    out(static_cast<Eigen::Index>(index_of(j, nx_))) =
        scale * w_hat(static_cast<Eigen::Index>(index_of(j, padded_)));
  return out;
}

ComplexVector<> Dealiaser::product(const ComplexVector<>& u_hat, const ComplexVector<>& v_hat,
                                   OutputBand band) const {
  const ComplexVector<> u = to_padded_physical(u_hat);
  const ComplexVector<> v = to_padded_physical(v_hat);
  return from_padded_physical(u.cwiseProduct(v), band);
}

ComplexVector<> dealiased_product(const PeriodicGrid& grid, const ComplexVector<>& u_hat,
                                  const ComplexVector<>& v_hat) {
  if (u_hat.size() != v_hat.size() || static_cast<std::size_t>(u_hat.size()) != grid.nx)
    throw std::invalid_argument("dealiased_product: length mismatch");
  return Dealiaser(grid.nx).product(u_hat, v_hat);
}

ComplexVector<> spectrum_of_modes(const PeriodicGrid& grid,
                                  std::initializer_list<std::pair<long, Complex>> modes) {
  ComplexVector<> out = ComplexVector<>::Zero(static_cast<Eigen::Index>(grid.nx));
  const long half = static_cast<long>(grid.nx / 2);
  const double n = static_cast<double>(grid.nx);
  for (const auto& [j, c] : modes) {
    if (j <= -half || j > half) throw std::invalid_argument("spectrum_of_modes: mode out of band");
    const double k = grid.spacing() * static_cast<double>(j);
    // x_m = a + mΔx shifts the phase of each mode by exp(i k a).
    out(static_cast<Eigen::Index>(index_of(j, grid.nx))) += n * c * std::exp(Complex(0.0, k * grid.a));
  }
  return out;
}

SpectralProblem build_zds(std::size_t nx) {
  if (nx < 32) throw std::invalid_argument("zds: Nx must be >= 32");
  SpectralProblem sp;
  sp.name = "zds";
  sp.dispersion = 1.0;
  sp.grid = PeriodicGrid::make(nx, -4.0 * std::numbers::pi, 4.0 * std::numbers::pi);
  const Eigen::VectorXd& k = sp.grid.wavenumbers;
  sp.problem.linear = (k.array().cube().cast<Complex>() * Complex(0.0, 1.0)).matrix();
  auto dealias = std::make_shared<const Dealiaser>(nx);
  sp.problem.nonlinear = [dealias](double, const ComplexVector<>& u_hat) {
    const ComplexVector<> u = dealias->to_padded_physical(u_hat);
    const ComplexVector<> cubic = (u.array().abs2() * u.array()).matrix();
    // Modes above ⌊Nx/3⌋ stay zero; the cubic term would otherwise alias into them.
    return ComplexVector<>(Complex(0.0, 2.0) *
                           dealias->from_padded_physical(cubic, OutputBand::retained));
  };
  // Mode j carries wavenumber j/4, so exp(3ix/4) is mode 3.
  sp.initial = spectrum_of_modes(sp.grid, {{0, Complex(1.0, 0.0)}, {3, Complex(0.01, 0.0)}});
  return sp;
}

SpectralProblem build_kdv(std::size_t nx, double delta) {
  if (nx < 32) throw std::invalid_argument("kdv: Nx must be >= 32");
  if (!(delta > 0.0)) throw std::invalid_argument("kdv: delta must be positive");
  SpectralProblem sp;
  sp.name = "kdv";
  sp.dispersion = delta;
  sp.grid = PeriodicGrid::make(nx, 0.0, 2.0);
  const Eigen::VectorXd& k = sp.grid.wavenumbers;
  sp.problem.linear = (k.array().cube().cast<Complex>() * Complex(0.0, delta)).matrix();
  const ComplexVector<> derivative = (k.cast<Complex>() * Complex(0.0, -0.5)).eval();
  auto dealias = std::make_shared<const Dealiaser>(nx);
  sp.problem.nonlinear = [dealias, derivative](double, const ComplexVector<>& u_hat) {
    const ComplexVector<> u = dealias->to_padded_physical(u_hat);
    const ComplexVector<> square = u.cwiseProduct(u);
    return ComplexVector<>(
        derivative.cwiseProduct(dealias->from_padded_physical(square, OutputBand::retained)));
  };
  sp.initial = spectrum_of_modes(sp.grid, {{1, Complex(0.5, 0.0)}, {-1, Complex(0.5, 0.0)}});
  return sp;
}

SpectralProblem build_problem(const std::string& name, std::size_t nx) {
  if (name == "zds") return build_zds(nx);
  if (name == "kdv") return build_kdv(nx);
  throw std::invalid_argument("unknown problem '" + name + "'");
}

std::string repartition_kind_name(RepartitionKind kind) {
  switch (kind) {
    case RepartitionKind::abs_k3: return "abs_k3";
    case RepartitionKind::k2: return "k2";
    case RepartitionKind::identity: return "identity";
  }
  return "?";
}

RepartitionKind parse_repartition_kind(const std::string& name) {
  if (name == "abs_k3") return RepartitionKind::abs_k3;
  if (name == "k2") return RepartitionKind::k2;
  if (name == "identity") return RepartitionKind::identity;
  throw std::invalid_argument("unknown repartition kind '" + name + "'");
}

RepartitionSpec RepartitionSpec::angle(RepartitionKind kind, double rho) {
  if (!(rho >= 0.0) || !(rho < std::numbers::pi / 2))
    throw std::invalid_argument("repartition: rho must lie in [0, pi/2)");
  RepartitionSpec s;
  s.kind = kind;
  s.rho = rho;
  return s;
}

RepartitionSpec RepartitionSpec::identity(double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("repartition: epsilon must be >= 0");
  RepartitionSpec s;
  s.kind = RepartitionKind::identity;
  s.epsilon = epsilon;
  return s;
}

std::string RepartitionSpec::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << repartition_kind_name(kind) << ':';
  if (epsilon)
    os << "eps=" << *epsilon;
  else
    os << "rho=" << rho;
  return os.str();
}

DiagonalRepartition<> repartition_operator(const SpectralProblem& sp, const RepartitionSpec& spec) {
  const Eigen::ArrayXd k = sp.grid.wavenumbers.array();
  DiagonalRepartition<> rep;
  switch (spec.kind) {
    case RepartitionKind::abs_k3: rep.diffusive = (-k.abs().cube()).cast<Complex>().matrix(); break;
    case RepartitionKind::k2: rep.diffusive = (-k.square()).cast<Complex>().matrix(); break;
    case RepartitionKind::identity:
      rep.diffusive = ComplexVector<>::Constant(k.size(), Complex(-1.0, 0.0));
      break;
  }
  if (spec.epsilon) {
    if (!(*spec.epsilon >= 0.0)) throw std::invalid_argument("repartition: epsilon must be >= 0");
    rep.epsilon = *spec.epsilon;
    return rep;
  }
  if (!(spec.rho >= 0.0) || !(spec.rho < std::numbers::pi / 2))
    throw std::invalid_argument("repartition: rho must lie in [0, pi/2)");
  if (spec.kind == RepartitionKind::identity) {
    rep.epsilon = std::tan(spec.rho);
    return rep;
  }
  // Both D choices are normalized at |k| = 1, where |L| equals the dispersion
  // coefficient: abs_k3 rotates every mode by rho, k2 over-rotates |k| < 1.
  rep.epsilon = spec.rho == 0.0 ? 0.0 : std::tan(spec.rho) * sp.dispersion;
  return rep;
}

SemilinearProblem<> apply_repartition(const SpectralProblem& sp, const RepartitionSpec& spec) {
  return repartitioned(sp.problem, repartition_operator(sp, spec));
}

std::string HyperviscositySpec::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << "hyperviscosity:m=" << m << ";gamma=" << gamma << ";q=" << q;
  return os.str();
}

DiagonalHyperviscosity<> hyperviscosity_operator(const PeriodicGrid& grid, const HyperviscositySpec& spec) {
  if (spec.m < 2 || spec.m % 2 != 0) throw std::invalid_argument("hyperviscosity: m must be even and >= 2");
  if (!(spec.gamma >= 0.0)) throw std::invalid_argument("hyperviscosity: gamma must be >= 0");
  if (spec.q < 1) throw std::invalid_argument("hyperviscosity: q must be >= 1");
  DiagonalHyperviscosity<> hv;
  hv.diffusive = (-grid.wavenumbers.array().pow(spec.m)).cast<Complex>().matrix();
  hv.gamma = spec.gamma;
  hv.method_order = spec.q;
  return hv;
}

SemilinearProblem<> apply_hyperviscosity(const SpectralProblem& sp, const HyperviscositySpec& spec,
                                         double dt) {
  return hyperviscous(sp.problem, hyperviscosity_operator(sp.grid, spec), dt);
}

double spectral_radius_fraction(const ComplexVector<>& linear, double h, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("spectral_radius_fraction: fraction must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(linear.size());
  const long limit = static_cast<long>(std::floor(fraction * static_cast<double>(n) / 2.0));
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const long j = static_cast<long>(i) <= static_cast<long>(n / 2) ? static_cast<long>(i)
                                                                    : static_cast<long>(i) - static_cast<long>(n);
    if (std::labs(j) <= limit) best = std::max(best, std::abs(h * linear(static_cast<Eigen::Index>(i))));
  }
  return best;
}

double spectral_power(const ComplexVector<>& u_hat) { return u_hat.squaredNorm(); }

}  // namespace expstab
