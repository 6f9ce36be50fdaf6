#include <gtest/gtest.h>

#include <cmath>

#include "powersense/error.hpp"
#include "powersense/microdoppler.hpp"

using namespace powersense;

namespace {

CoefficientSeries series(const std::vector<cplx>& v, const std::vector<int>& ok, double dt = 2e-3) {
  CoefficientSeries s;
  for (std::size_t n = 0; n < v.size(); ++n) s.push(dt * static_cast<double>(n), v[n], ok[n] != 0);
  return s;
}

CoefficientSeries tone(double freq, std::size_t n, double dt = 2e-3) {
  CoefficientSeries s;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = dt * static_cast<double>(k);
    s.push(t, std::polar(1.0, kTwoPi * freq * t), true);
  }
  return s;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::Io;
}

}  // namespace

TEST(PeakCoefficient, ReturnsComplexValueAtPeak) {
  FeatureTensor t;
  t.data = Tensor3<cplx>(3, 3, 3, {0.1, 0.0});
  t.delay_axis = t.aoa_axis = t.doppler_axis = {-1.0, 0.0, 1.0};
  t.doppler_bins = {-1, 0, 1};
  t.data(1, 2, 0) = {2.0, 3.0};
  EXPECT_EQ(extract_peak_coefficient(t), cplx(2.0, 3.0));
  EXPECT_EQ(code_of([] { extract_peak_coefficient(FeatureTensor{}); }), Errc::EmptyTensor);
}

TEST(InterpolateGaps, Midpoint) {
  const auto s = interpolate_gaps(series({{0, 0}, {}, {2, 4}}, {1, 0, 1}));
  EXPECT_EQ(s.values[1], cplx(1.0, 2.0));
  EXPECT_TRUE(std::all_of(s.valid.begin(), s.valid.end(), [](auto v) { return v == 1; }));
}

TEST(InterpolateGaps, LongerGapIsLinear) {
  const auto s = interpolate_gaps(series({{0, 0}, {}, {}, {3, 3}}, {1, 0, 0, 1}));
  EXPECT_NEAR(std::abs(s.values[1] - cplx(1, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.values[2] - cplx(2, 2)), 0.0, 1e-15);
}

TEST(InterpolateGaps, EdgesHoldNearestValid) {
  const auto s = interpolate_gaps(series({{}, {1, 0}, {3, 0}, {}}, {0, 1, 1, 0}));
  EXPECT_EQ(s.values[0], cplx(1, 0));
  EXPECT_EQ(s.values[3], cplx(3, 0));
}

TEST(InterpolateGaps, FewerThanTwoValidThrows) {
  EXPECT_EQ(code_of([] { interpolate_gaps(series({{1, 0}, {}, {}}, {1, 0, 0})); }), Errc::InsufficientData);
  EXPECT_EQ(code_of([] { interpolate_gaps(CoefficientSeries{}); }), Errc::InsufficientData);
}

TEST(WindowFft, ShapeAndAxes) {
  const auto cfg = SystemConfig::defaults();
  const auto c = window_doppler_fft(tone(0.0, 100), cfg);
  EXPECT_EQ(c.windows, 100u - 64u + 1u);
  EXPECT_EQ(c.bins, 128u);
  EXPECT_NEAR(c.doppler_axis[64], 0.0, 1e-12);
  EXPECT_NEAR(c.doppler_axis[65] - c.doppler_axis[64], 500.0 / 128.0, 1e-9);
  EXPECT_NEAR(c.doppler_axis[0], -250.0, 1e-9);
  EXPECT_NEAR(c.time_axis[0], 0.5 * 63 * 2e-3, 1e-12);
  EXPECT_NEAR(c.time_axis[1] - c.time_axis[0], 2e-3, 1e-12);
}

TEST(WindowFft, ConstantSeriesIsDc) {
  const auto cfg = SystemConfig::defaults();
  const auto c = window_doppler_fft(tone(0.0, 64), cfg);
  ASSERT_EQ(c.windows, 1u);
  EXPECT_NEAR(std::abs(c.at(0, 64)), 64.0, 1e-9);
  for (std::size_t b = 0; b < c.bins; ++b) {
    if (b != 64) EXPECT_LT(std::abs(c.at(0, b)), std::abs(c.at(0, 64)));
  }
}

TEST(WindowFft, PositiveToneLandsOnPositiveSide) {
  const auto cfg = SystemConfig::defaults();
  const auto c = window_doppler_fft(tone(62.5, 80), cfg);
  for (std::size_t w = 0; w < c.windows; ++w) {
    std::size_t best = 0;
    for (std::size_t b = 0; b < c.bins; ++b) {
      if (std::abs(c.at(w, b)) > std::abs(c.at(w, best))) best = b;
    }
    EXPECT_NEAR(c.doppler_axis[best], 62.5, 1e-9);
    const double mirror_db = 20.0 * std::log10(std::abs(c.at(w, best)) / (std::abs(c.at(w, 128 - best)) + 1e-300));
    EXPECT_GE(mirror_db, 20.0);
  }
}

TEST(WindowFft, ShortSeriesThrows) {
  const auto cfg = SystemConfig::defaults();
  EXPECT_EQ(code_of([&] { window_doppler_fft(tone(1.0, 63), cfg); }), Errc::InsufficientData);
}

TEST(Normalize, DecibelScaling) {
  ComplexSpectrogram c;
  c.windows = 1;
  c.bins = 3;
  c.rows = {1.0, 10.0, 100.0};
  const auto s = normalize_spectrogram(c);
  EXPECT_NEAR(s.at(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(s.at(0, 1), 0.5, 1e-12);
  EXPECT_NEAR(s.at(0, 2), 1.0, 1e-12);
}

TEST(Normalize, UniformMapsToZero) {
  ComplexSpectrogram c;
  c.windows = 2;
  c.bins = 2;
  c.rows = {{3, 4}, {0, 5}, {-5, 0}, {4, -3}};
  const auto s = normalize_spectrogram(c);
  for (double v : s.matrix) EXPECT_EQ(v, 0.0);
}

TEST(Normalize, AllZeroThrows) {
  ComplexSpectrogram c;
  c.windows = 1;
  c.bins = 4;
  c.rows.assign(4, cplx{});
  EXPECT_EQ(code_of([&] { normalize_spectrogram(c); }), Errc::AllZero);
}
