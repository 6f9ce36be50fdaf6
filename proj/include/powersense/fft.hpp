#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "powersense/core.hpp"

namespace powersense {

// Batched 1D complex FFTs over contiguous rows, backed by FFTW. Unnormalized.
// Forward uses exp(-j...), Inverse uses exp(+j...).
// Plans are created once; execute() is safe to call from the owning thread.
class BatchFft {
 public:
  enum class Direction { Forward, Inverse };

  BatchFft(std::size_t length, std::size_t count, Direction dir);
  ~BatchFft();
  BatchFft(BatchFft&&) noexcept;
  BatchFft& operator=(BatchFft&&) noexcept;
  BatchFft(const BatchFft&) = delete;
  BatchFft& operator=(const BatchFft&) = delete;

  std::size_t length() const { return length_; }
  std::size_t count() const { return count_; }
  std::span<cplx> input() { return {in_, length_ * count_}; }
  std::span<const cplx> output() const { return {out_, length_ * count_}; }
  std::span<cplx> input_row(std::size_t r) { return {in_ + r * length_, length_}; }
  std::span<const cplx> output_row(std::size_t r) const { return {out_ + r * length_, length_}; }

  void execute();

 private:
  void release() noexcept;

  std::size_t length_ = 0;
  std::size_t count_ = 0;
  cplx* in_ = nullptr;
  cplx* out_ = nullptr;
  void* plan_ = nullptr;
};

// Batched real-to-complex forward FFTs. Each output row holds length/2+1 bins.
class RealBatchFft {
 public:
  RealBatchFft(std::size_t length, std::size_t count);
  ~RealBatchFft();
  RealBatchFft(RealBatchFft&&) noexcept;
  RealBatchFft& operator=(RealBatchFft&&) noexcept;
  RealBatchFft(const RealBatchFft&) = delete;
  RealBatchFft& operator=(const RealBatchFft&) = delete;

  std::size_t length() const { return length_; }
  std::size_t count() const { return count_; }
  std::size_t bins() const { return length_ / 2 + 1; }
  std::span<double> input() { return {in_, length_ * count_}; }
  std::span<double> input_row(std::size_t r) { return {in_ + r * length_, length_}; }
  std::span<const cplx> output_row(std::size_t r) const { return {out_ + r * bins(), bins()}; }

  void execute();

 private:
  void release() noexcept;

  std::size_t length_ = 0;
  std::size_t count_ = 0;
  double* in_ = nullptr;
  cplx* out_ = nullptr;
  void* plan_ = nullptr;
};

// Index shift so that bin 0 lands in the middle (numpy fftshift convention).
inline std::size_t fftshift_index(std::size_t shifted, std::size_t n) {
  return (shifted + (n + 1) / 2) % n;
}

}  // namespace powersense
