#include "powersense/detection.hpp"

#include <algorithm>
#include <cmath>

#include "powersense/error.hpp"
#include "powersense/features.hpp"

namespace powersense {

double subcube_snr(const FeatureTensor& t, std::size_t delay_idx, std::size_t aoa_idx, std::size_t doppler_idx) {
  const auto& y = t.data;
  if (delay_idx >= y.dim(0) || aoa_idx >= y.dim(1) || doppler_idx >= y.dim(2)) {
    throw Error(Errc::ShapeMismatch, "peak index outside the tensor");
  }
  double total = 0.0;
  for (const auto& v : y.flat()) total += std::norm(v);
  const double noise = total / static_cast<double>(y.size());

  auto span = [](std::size_t c, std::size_t n) {
    return std::pair{c == 0 ? 0 : c - 1, std::min(c + 1, n - 1)};
  };
  const auto [d0, d1] = span(delay_idx, y.dim(0));
  const auto [a0, a1] = span(aoa_idx, y.dim(1));
  const auto [b0, b1] = span(doppler_idx, y.dim(2));
  double sub = 0.0;
  std::size_t count = 0;
  for (std::size_t d = d0; d <= d1; ++d) {
    for (std::size_t a = a0; a <= a1; ++a) {
      for (std::size_t b = b0; b <= b1; ++b) {
        sub += std::norm(y(d, a, b));
        ++count;
      }
    }
  }
  return (sub / static_cast<double>(count)) / noise;
}

std::optional<Detection> detect(const FeatureTensor& t, const SystemConfig& cfg) {
  if (t.data.empty()) return std::nullopt;
  const Peak p = find_global_peak(t);
  const double ratio = subcube_snr(t, p.delay_idx, p.aoa_idx, p.doppler_idx);
  if (!std::isfinite(ratio) || ratio <= 0.0) return std::nullopt;
  const double snr_db = 10.0 * std::log10(ratio);
  if (!(snr_db > cfg.snr_threshold_db)) return std::nullopt;
  Detection d;
  d.delay = cfg.tx_delay() + p.delay;
  d.aoa = p.aoa;
  d.doppler = p.doppler;
  d.snr_db = snr_db;
  d.time = t.time;
  d.valid = true;
  d.delay_idx = p.delay_idx;
  d.aoa_idx = p.aoa_idx;
  d.doppler_idx = p.doppler_idx;
  return d;
}

std::vector<std::size_t> zscore_filter(std::span<const double> values, double threshold) {
  std::vector<std::size_t> kept;
  if (values.empty()) return kept;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sigma = std::sqrt(var / n);
  for (std::size_t l = 0; l < values.size(); ++l) {
    if (sigma == 0.0 || std::abs((values[l] - mean) / sigma) <= threshold) kept.push_back(l);
  }
  return kept;
}

std::optional<FusedMeasurement> weighted_fuse(std::span<const Detection> dets, const SystemConfig& cfg,
                                              std::vector<std::size_t>* kept) {
  if (kept != nullptr) kept->clear();
  if (dets.empty()) return std::nullopt;
  const std::size_t n = dets.size();
  std::vector<int> votes(n, 0);
  std::vector<double> column(n);
  auto vote = [&](auto field) {
    for (std::size_t l = 0; l < n; ++l) column[l] = field(dets[l]);
    for (std::size_t l : zscore_filter(column, cfg.zscore_threshold)) ++votes[l];
  };
  vote([](const Detection& d) { return d.delay; });
  vote([](const Detection& d) { return d.aoa; });
  vote([](const Detection& d) { return d.doppler; });
  vote([](const Detection& d) { return d.snr_db; });

  FusedMeasurement m;
  double wsum = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    if (votes[l] != 4) continue;
    const auto& d = dets[l];
    const double w = std::max(d.snr_db, 1.0);
    m.delay += w * d.delay;
    m.aoa += w * d.aoa;
    m.doppler += w * d.doppler;
    m.snr += w * d.snr_db;
    m.mean_time += w * d.time;
    wsum += w;
    ++m.n_used;
    if (kept != nullptr) kept->push_back(l);
  }
  if (m.n_used == 0) return std::nullopt;
  m.delay /= wsum;
  m.aoa /= wsum;
  m.doppler /= wsum;
  m.snr /= wsum;
  m.mean_time /= wsum;
  m.window_end_time = dets.back().time;
  return m;
}

std::optional<FusedMeasurement> MeasurementFuser::push(double time, const std::optional<Detection>& det) {
  const bool pushed = det.has_value() && det->valid;
  if (pushed) window_.push_back(*det);
  while (!window_.empty() && window_.front().time <= time - cfg_.fusion_window) window_.pop_front();
  last_kept_ = false;
  if (window_.empty()) return std::nullopt;

  const std::vector<Detection> dets(window_.begin(), window_.end());
  std::vector<std::size_t> kept;
  auto fused = weighted_fuse(dets, cfg_, &kept);
  if (pushed && !kept.empty() && kept.back() == dets.size() - 1) last_kept_ = true;
  if (fused) fused->window_end_time = time;
  return fused;
}

}  // namespace powersense
