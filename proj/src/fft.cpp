#include "expstab/fft.hpp"

#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace expstab {

namespace {

// The FFTW planner is not reentrant; execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const Complex* p) { return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p)); }

}  // namespace

struct FourierTransform::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

FourierTransform::FourierTransform(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw std::invalid_argument("FourierTransform: length must be positive");
  ComplexVector<> a(static_cast<Eigen::Index>(n)), b(static_cast<Eigen::Index>(n));
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_dft_1d(len, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FourierTransform: planning failed");
}

FourierTransform::~FourierTransform() {
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

void FourierTransform::forward(const ComplexVector<>& in, ComplexVector<>& out) const {
  if (static_cast<std::size_t>(in.size()) != n_) throw std::invalid_argument("forward: length mismatch");
  if (out.data() == in.data()) throw std::invalid_argument("transform: in-place call");
  out.resize(in.size());
  fftw_execute_dft(plans_->forward, as_fftw(in.data()), as_fftw(out.data()));
}

void FourierTransform::inverse(const ComplexVector<>& in, ComplexVector<>& out) const {
  if (static_cast<std::size_t>(in.size()) != n_) throw std::invalid_argument("inverse: length mismatch");
  if (out.data() == in.data()) throw std::invalid_argument("transform: in-place call");
  out.resize(in.size());
  fftw_execute_dft(plans_->backward, as_fftw(in.data()), as_fftw(out.data()));
  out /= static_cast<double>(n_);
}

ComplexVector<> FourierTransform::forward(const ComplexVector<>& in) const {
  ComplexVector<> out;
  forward(in, out);
  return out;
}

ComplexVector<> FourierTransform::inverse(const ComplexVector<>& in) const {
  ComplexVector<> out;
  inverse(in, out);
  return out;
}

}  // namespace expstab
