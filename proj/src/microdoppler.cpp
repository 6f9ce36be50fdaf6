#include "powersense/microdoppler.hpp"

#include <algorithm>
#include <cmath>

#include "powersense/error.hpp"
#include "powersense/features.hpp"
#include "powersense/fft.hpp"

namespace powersense {

cplx extract_peak_coefficient(const FeatureTensor& t) {
  const Peak p = find_global_peak(t);
  return t.data(p.delay_idx, p.aoa_idx, p.doppler_idx);
}

CoefficientSeries interpolate_gaps(CoefficientSeries s) {
  std::vector<std::size_t> good;
  for (std::size_t n = 0; n < s.size(); ++n) {
    if (s.valid[n] != 0) good.push_back(n);
  }
  if (good.size() < 2) throw Error(Errc::InsufficientData, "need at least two valid coefficients");
  for (std::size_t n = 0; n < good.front(); ++n) s.values[n] = s.values[good.front()];
  for (std::size_t n = good.back() + 1; n < s.size(); ++n) s.values[n] = s.values[good.back()];
  for (std::size_t g = 0; g + 1 < good.size(); ++g) {
    const std::size_t a = good[g];
    const std::size_t b = good[g + 1];
    for (std::size_t n = a + 1; n < b; ++n) {
      const double w = static_cast<double>(n - a) / static_cast<double>(b - a);
      s.values[n] = (1.0 - w) * s.values[a] + w * s.values[b];
    }
  }
  std::fill(s.valid.begin(), s.valid.end(), std::uint8_t{1});
  return s;
}

ComplexSpectrogram window_doppler_fft(const CoefficientSeries& s, const SystemConfig& cfg) {
  const std::size_t len = cfg.md_window_len;
  const std::size_t nfft = cfg.md_fft_len;
  if (s.size() < len) throw Error(Errc::InsufficientData, "series shorter than one window");
  const double dt = cfg.md_sample_interval();

  ComplexSpectrogram out;
  out.windows = s.size() - len + 1;
  out.bins = nfft;
  out.rows.resize(out.windows * nfft);
  for (std::size_t b = 0; b < nfft; ++b) {
    const int q = static_cast<int>(b) - static_cast<int>(nfft / 2);
    out.doppler_axis.push_back(static_cast<double>(q) / (static_cast<double>(nfft) * dt));
  }

  BatchFft fft(nfft, out.windows, BatchFft::Direction::Forward);
  for (std::size_t w = 0; w < out.windows; ++w) {
    auto row = fft.input_row(w);
    std::copy_n(s.values.begin() + static_cast<std::ptrdiff_t>(w), len, row.begin());
    out.time_axis.push_back(0.5 * (s.times[w] + s.times[w + len - 1]));
  }
  fft.execute();
  for (std::size_t w = 0; w < out.windows; ++w) {
    auto row = fft.output_row(w);
    for (std::size_t b = 0; b < nfft; ++b) out.rows[w * nfft + b] = row[fftshift_index(b, nfft)];
  }
  return out;
}

Spectrogram normalize_spectrogram(const ComplexSpectrogram& c) {
  if (std::all_of(c.rows.begin(), c.rows.end(), [](cplx v) { return v == cplx{}; })) {
    throw Error(Errc::AllZero, "spectrogram has no energy");
  }
  Spectrogram s;
  s.windows = c.windows;
  s.bins = c.bins;
  s.time_axis = c.time_axis;
  s.doppler_axis = c.doppler_axis;
  s.matrix.resize(c.rows.size());
  for (std::size_t n = 0; n < c.rows.size(); ++n) s.matrix[n] = 20.0 * std::log10(std::abs(c.rows[n]) + 1e-12);
  const auto [lo, hi] = std::minmax_element(s.matrix.begin(), s.matrix.end());
  const double min = *lo;
  const double range = *hi - *lo;
  for (auto& v : s.matrix) v = range > 0.0 ? (v - min) / range : 0.0;
  return s;
}

}  // namespace powersense
