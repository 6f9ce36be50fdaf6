#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "powersense/core.hpp"
#include "powersense/detection.hpp"
#include "powersense/features.hpp"
#include "powersense/microdoppler.hpp"
#include "powersense/tracking.hpp"

namespace powersense {

struct FrameResult {
  double time = 0.0;
  std::optional<Detection> detection;  // after peak refinement
  std::optional<FusedMeasurement> fused;
  std::optional<Vec2> fused_position;
  cplx coefficient{};
  bool coefficient_valid = false;
};

// Per-CPI chain: features, detection, refinement, fusion, tracking, and the
// peak coefficient series for micro-Doppler.
class Pipeline {
 public:
  explicit Pipeline(const SystemConfig& cfg);

  FrameResult process(const CpiCube& cube);

  const FeatureTensor& last_tensor() const { return extractor_.tensor(); }
  const Tracker& tracker() const { return tracker_; }
  const CoefficientSeries& series() const { return series_; }

 private:
  SystemConfig cfg_;
  FeatureExtractor extractor_;
  MeasurementFuser fuser_;
  Tracker tracker_;
  CoefficientSeries series_;
};

// Gap filling, windowed FFT and normalization of a coefficient series.
Spectrogram build_spectrogram(const CoefficientSeries& s, const SystemConfig& cfg);

struct BenchResult {
  std::vector<double> latency_ms;  // per CPI, in processing order
  double p50 = 0.0;
  double p98 = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

// Times Pipeline::process over `cpis` synthetic CPIs of a walking target.
BenchResult run_bench(const SystemConfig& cfg, std::size_t cpis, std::uint64_t seed);

double percentile(std::vector<double> v, double q);

}  // namespace powersense
