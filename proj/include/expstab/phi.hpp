#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace expstab {

/// Highest φ index supported by phi_scalar.
inline constexpr int kMaxPhiOrder = 8;

/// Fixed number of Taylor terms used inside the unit disk.
inline constexpr int kSeriesTerms = 30;

namespace detail {

template <typename Real>
Real inverse_factorial(int k) {
  Real value(1);
  for (int j = 2; j <= k; ++j) value /= Real(j);
  return value;
}

// Σ_{j ≥ 0} z^j / (j+k)!, stopped after max_terms or once the tail is
// below rounding.
template <typename Real>
std::complex<Real> phi_series(int k, const std::complex<Real>& z, int max_terms,
                              bool stop_early) {
  std::complex<Real> term(inverse_factorial<Real>(k), Real(0));
  std::complex<Real> sum = term;
  for (int j = 1; j < max_terms; ++j) {
    term *= z / Real(j + k);
    sum += term;
    if (stop_early &&
        std::abs(term) <= std::numeric_limits<Real>::epsilon() * Real(1e-3) * std::abs(sum))
      break;
  }
  return sum;
}

}  // namespace detail

/// φ_k(z) for k ≤ 8.
///
/// Inside the unit disk the truncated Taylor series is used. Outside it,
/// indices up to |z| come from the forward recurrence started at e^z (stable
/// when |z| ≥ index), and higher indices from the series, which converges
/// without cancellation once k > |z|.
template <typename Real>
std::complex<Real> phi_scalar(int k, const std::complex<Real>& z) {
  if (k < 0 || k > kMaxPhiOrder)
    throw std::invalid_argument("phi_scalar: order out of range");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("invalid argument");

  const Real radius = std::abs(z);
  if (radius < Real(1)) return detail::phi_series<Real>(k, z, kSeriesTerms, false);
  if (Real(k) > radius) return detail::phi_series<Real>(k, z, 400, true);

  std::complex<Real> phi = std::exp(z);
  Real inv_fact(1);
  for (int j = 0; j < k; ++j) {
    phi = (phi - inv_fact) / z;
    inv_fact /= Real(j + 1);
  }
  return phi;
}

/// φ_0..φ_K evaluated elementwise over scale·diag(L).
///
/// Immutable after construction and safe to share between threads.
template <int Size = Eigen::Dynamic>
class PhiTable {
 public:
  using Vector = Eigen::Matrix<std::complex<double>, Size, 1>;

  PhiTable(int max_order, const Vector& linear_diag, double scale)
      : scale_(scale), args_(scale * linear_diag) {
    if (max_order < 4 || max_order > kMaxPhiOrder)
      throw std::invalid_argument("PhiTable: order must lie in [4, 8]");
    if (linear_diag.size() == 0) throw std::invalid_argument("PhiTable: empty diagonal");
    if (!(scale > 0.0)) throw std::invalid_argument("PhiTable: scale must be positive");
    values_.resize(max_order + 1, Vector(args_.size()));
    for (Eigen::Index i = 0; i < args_.size(); ++i) {
      for (int k = 0; k <= max_order; ++k) values_[k](i) = phi_scalar<double>(k, args_(i));
    }
  }

  int max_order() const { return static_cast<int>(values_.size()) - 1; }
  double scale() const { return scale_; }
  const Vector& args() const { return args_; }
  const Vector& operator[](int k) const { return values_.at(k); }

 private:
  double scale_;
  Vector args_;
  std::vector<Vector> values_;
};

/// PhiTables for one linear operator, keyed by (scale, order).
template <int Size = Eigen::Dynamic>
class PhiCache {
 public:
  using Vector = typename PhiTable<Size>::Vector;

  explicit PhiCache(Vector linear_diag, int max_order = 4)
      : linear_(std::move(linear_diag)), max_order_(max_order) {}

  const PhiTable<Size>& at(double scale) { return at(scale, max_order_); }

  const PhiTable<Size>& at(double scale, int max_order) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(scale, max_order);
    auto it = tables_.find(key);
    if (it == tables_.end())
      it = tables_.emplace(key, std::make_unique<PhiTable<Size>>(max_order, linear_, scale)).first;
    return *it->second;
  }

  const Vector& linear() const { return linear_; }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return tables_.size();
  }

 private:
  Vector linear_;
  int max_order_;
  mutable std::mutex mutex_;
  std::map<std::pair<double, int>, std::unique_ptr<PhiTable<Size>>> tables_;
};

}  // namespace expstab
