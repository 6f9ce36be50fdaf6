#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "powersense/core.hpp"

namespace powersense {

struct FusedMeasurement {
  double delay = 0.0;    // s, absolute
  double aoa = 0.0;      // rad
  double doppler = 0.0;  // Hz
  double snr = 0.0;      // dB
  double window_end_time = 0.0;
  double mean_time = 0.0;  // s, weighted mean time of the fused detections
  std::size_t n_used = 0;
};

// Mean |Y|^2 over the 3x3x3 neighbourhood of the peak (clipped at the edges)
// divided by the mean |Y|^2 of the whole tensor.
double subcube_snr(const FeatureTensor& t, std::size_t delay_idx, std::size_t aoa_idx, std::size_t doppler_idx);

// Global peak test against cfg.snr_threshold_db. Returns nullopt when no
// target is present. The returned delay is absolute (direct path included).
std::optional<Detection> detect(const FeatureTensor& t, const SystemConfig& cfg);

// Indices whose population Z-score magnitude is within `threshold`.
std::vector<std::size_t> zscore_filter(std::span<const double> values, double threshold);

// Z-score filter on delay, AoA, Doppler and SNR, then SNR-weighted mean of
// the survivors with dB weights floored at 1. `kept` receives the indices used.
std::optional<FusedMeasurement> weighted_fuse(std::span<const Detection> dets, const SystemConfig& cfg,
                                              std::vector<std::size_t>* kept = nullptr);

// Sliding fusion window fed once per CPI in time order.
class MeasurementFuser {
 public:
  explicit MeasurementFuser(const SystemConfig& cfg) : cfg_(cfg) {}

  // `time` is the CPI time; detections older than the window are dropped.
  std::optional<FusedMeasurement> push(double time, const std::optional<Detection>& det);
  // Whether the detection given to the last push survived the outlier filter.
  bool last_kept() const { return last_kept_; }
  std::size_t size() const { return window_.size(); }

 private:
  SystemConfig cfg_;
  std::deque<Detection> window_;
  bool last_kept_ = false;
};

}  // namespace powersense
