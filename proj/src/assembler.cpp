#include "powersense/assembler.hpp"

#include <algorithm>
#include <cmath>

#include "powersense/error.hpp"

namespace powersense {

CpiAssembler::CpiAssembler(const SystemConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<CpiCube> CpiAssembler::push(const CsiRecord& rec) {
  if (rec.payload.size() != cfg_.num_subcarriers() * cfg_.num_antennas) {
    throw Error(Errc::ShapeMismatch, "record shape does not match the configuration");
  }
  const bool finite = std::all_of(rec.payload.begin(), rec.payload.end(), [](std::complex<float> v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
  if (!finite) {
    ++rejected_;
    return push_gap(1);
  }
  const std::uint64_t index = window_start_ + slots_.size();
  if (!time_origin_) time_origin_ = rec.timestamp - static_cast<double>(index) * cfg_.sample_interval;
  slots_.push_back(rec);
  return advance();
}

std::vector<CpiCube> CpiAssembler::push_gap(std::uint64_t count) {
  std::vector<CpiCube> out;
  for (std::uint64_t n = 0; n < count; ++n) {
    slots_.push_back(std::nullopt);
    auto cubes = advance();
    std::move(cubes.begin(), cubes.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<CpiCube> CpiAssembler::advance() {
  std::vector<CpiCube> out;
  const std::size_t nt = cfg_.cpi_len;
  while (slots_.size() >= nt) {
    const auto missing = static_cast<std::size_t>(
        std::count_if(slots_.begin(), slots_.begin() + static_cast<std::ptrdiff_t>(nt), [](const auto& s) { return !s; }));
    if (missing == nt ||
        static_cast<double>(missing) > cfg_.max_missing_fraction * static_cast<double>(nt)) {
      ++skipped_;
    } else {
      out.push_back(build(missing));
      ++emitted_;
      if (missing > 0) ++filled_cubes_;
    }
    const std::size_t step = std::min(cfg_.cpi_stride, slots_.size());
    slots_.erase(slots_.begin(), slots_.begin() + static_cast<std::ptrdiff_t>(step));
    window_start_ += step;
  }
  return out;
}

CpiCube CpiAssembler::build(std::size_t missing) const {
  const std::size_t nf = cfg_.num_subcarriers();
  const std::size_t na = cfg_.num_antennas;
  const std::size_t nt = cfg_.cpi_len;
  CpiCube cube;
  cube.data = Tensor3<cplx>(nf, na, nt);
  cube.seq = window_start_;
  cube.filled_samples = missing;
  cube.start_time = time_origin_.value_or(0.0) + static_cast<double>(window_start_) * cfg_.sample_interval;

  const CsiRecord* prev = nullptr;
  for (std::size_t k = 0; k < nt && prev == nullptr; ++k) {
    if (slots_[k]) prev = &*slots_[k];
  }
  for (std::size_t k = 0; k < nt; ++k) {
    if (slots_[k]) prev = &*slots_[k];
    const auto& p = prev->payload;
    for (std::size_t j = 0; j < nf; ++j) {
      for (std::size_t i = 0; i < na; ++i) {
        const auto v = p[j * na + i];
        cube.data(j, i, k) = cplx(v.real(), v.imag());
      }
    }
  }
  return cube;
}

}  // namespace powersense
