#pragma once

#include <cstddef>
#include <memory>

#include "expstab/problem.hpp"

namespace expstab {

/// One-dimensional complex DFT of fixed length. The forward transform is
/// unscaled and the inverse carries 1/n. Both are safe to call concurrently
/// on distinct buffers.
class FourierTransform {
 public:
  explicit FourierTransform(std::size_t n);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  std::size_t size() const { return n_; }

  void forward(const ComplexVector<>& in, ComplexVector<>& out) const;
  void inverse(const ComplexVector<>& in, ComplexVector<>& out) const;

  ComplexVector<> forward(const ComplexVector<>& in) const;
  ComplexVector<> inverse(const ComplexVector<>& in) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace expstab
