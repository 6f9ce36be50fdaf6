#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "powersense/core.hpp"

namespace powersense {

// One peak coefficient per CPI, uniformly spaced in time.
struct CoefficientSeries {
  std::vector<cplx> values;
  std::vector<double> times;
  std::vector<std::uint8_t> valid;

  void push(double time, cplx value, bool ok) {
    times.push_back(time);
    values.push_back(ok ? value : cplx{});
    valid.push_back(ok ? 1 : 0);
  }
  std::size_t size() const { return values.size(); }
};

// Complex window spectra, row-major windows x bins, Doppler axis ascending.
struct ComplexSpectrogram {
  std::vector<cplx> rows;
  std::size_t windows = 0;
  std::size_t bins = 0;
  std::vector<double> time_axis;     // s, window centre
  std::vector<double> doppler_axis;  // Hz
  cplx at(std::size_t w, std::size_t b) const { return rows[w * bins + b]; }
};

// Log-magnitude spectrogram scaled to [0, 1].
struct Spectrogram {
  std::vector<double> matrix;
  std::size_t windows = 0;
  std::size_t bins = 0;
  std::vector<double> time_axis;
  std::vector<double> doppler_axis;
  double at(std::size_t w, std::size_t b) const { return matrix[w * bins + b]; }
};

// Tensor value at the global peak. Throws Error(EmptyTensor).
cplx extract_peak_coefficient(const FeatureTensor& t);

// Linear fill of invalid entries; edges take the nearest valid value.
// Throws Error(InsufficientData) with fewer than two valid entries.
CoefficientSeries interpolate_gaps(CoefficientSeries s);

// Windows of md_window_len entries advancing by one entry, zero-padded to
// md_fft_len and transformed with exp(-j...). Throws Error(InsufficientData).
ComplexSpectrogram window_doppler_fft(const CoefficientSeries& s, const SystemConfig& cfg);

// 20 log10(|x| + 1e-12), then min-max over the matrix. A matrix with no
// dynamic range maps to all zeros. Throws Error(AllZero).
Spectrogram normalize_spectrogram(const ComplexSpectrogram& c);

}  // namespace powersense
