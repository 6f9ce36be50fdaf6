#include "powersense/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <utility>

#include "powersense/error.hpp"

namespace powersense {

namespace {

// FFTW's planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
T* fft_alloc(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (p == nullptr) throw std::bad_alloc();
  std::fill(p, p + n, T{});
  return p;
}

}  // namespace

BatchFft::BatchFft(std::size_t length, std::size_t count, Direction dir) : length_(length), count_(count) {
  in_ = fft_alloc<cplx>(length * count);
  out_ = fft_alloc<cplx>(length * count);
  const int n = static_cast<int>(length);
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_many_dft(1, &n, static_cast<int>(count), reinterpret_cast<fftw_complex*>(in_), nullptr, 1, n,
                             reinterpret_cast<fftw_complex*>(out_), nullptr, 1, n,
                             dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  if (plan_ == nullptr) {
    release();
    throw Error(Errc::NumericalFailure, "FFTW planning failed");
  }
}

BatchFft::~BatchFft() { release(); }

BatchFft::BatchFft(BatchFft&& o) noexcept
    : length_(o.length_), count_(o.count_), in_(std::exchange(o.in_, nullptr)),
      out_(std::exchange(o.out_, nullptr)), plan_(std::exchange(o.plan_, nullptr)) {}

BatchFft& BatchFft::operator=(BatchFft&& o) noexcept {
  if (this != &o) {
    release();
    length_ = o.length_;
    count_ = o.count_;
    in_ = std::exchange(o.in_, nullptr);
    out_ = std::exchange(o.out_, nullptr);
    plan_ = std::exchange(o.plan_, nullptr);
  }
  return *this;
}

void BatchFft::execute() { fftw_execute(static_cast<fftw_plan>(plan_)); }

void BatchFft::release() noexcept {
  if (plan_ != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    plan_ = nullptr;
  }
  fftw_free(in_);
  fftw_free(out_);
  in_ = nullptr;
  out_ = nullptr;
}

RealBatchFft::RealBatchFft(std::size_t length, std::size_t count) : length_(length), count_(count) {
  in_ = fft_alloc<double>(length * count);
  out_ = fft_alloc<cplx>(bins() * count);
  const int n = static_cast<int>(length);
  const int nb = static_cast<int>(bins());
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_many_dft_r2c(1, &n, static_cast<int>(count), in_, nullptr, 1, n,
                                 reinterpret_cast<fftw_complex*>(out_), nullptr, 1, nb, FFTW_ESTIMATE);
  if (plan_ == nullptr) {
    release();
    throw Error(Errc::NumericalFailure, "FFTW planning failed");
  }
}

RealBatchFft::~RealBatchFft() { release(); }

RealBatchFft::RealBatchFft(RealBatchFft&& o) noexcept
    : length_(o.length_), count_(o.count_), in_(std::exchange(o.in_, nullptr)),
      out_(std::exchange(o.out_, nullptr)), plan_(std::exchange(o.plan_, nullptr)) {}

RealBatchFft& RealBatchFft::operator=(RealBatchFft&& o) noexcept {
  if (this != &o) {
    release();
    length_ = o.length_;
    count_ = o.count_;
    in_ = std::exchange(o.in_, nullptr);
    out_ = std::exchange(o.out_, nullptr);
    plan_ = std::exchange(o.plan_, nullptr);
  }
  return *this;
}

void RealBatchFft::execute() { fftw_execute(static_cast<fftw_plan>(plan_)); }

void RealBatchFft::release() noexcept {
  if (plan_ != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    plan_ = nullptr;
  }
  fftw_free(in_);
  fftw_free(out_);
  in_ = nullptr;
  out_ = nullptr;
}

}  // namespace powersense
