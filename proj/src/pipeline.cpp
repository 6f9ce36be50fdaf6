#include "powersense/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "powersense/error.hpp"
#include "powersense/simulator.hpp"

namespace powersense {

Pipeline::Pipeline(const SystemConfig& cfg) : cfg_(cfg), extractor_(cfg), fuser_(cfg), tracker_(cfg) {}

FrameResult Pipeline::process(const CpiCube& cube) {
  const FeatureTensor& t = extractor_.run(cube);
  FrameResult r;
  r.time = t.time;
  r.detection = detect(t, cfg_);
  if (r.detection) {
    r.coefficient = t.data(r.detection->delay_idx, r.detection->aoa_idx, r.detection->doppler_idx);
    if (cfg_.refine_peak) {
      Peak p;
      p.delay_idx = r.detection->delay_idx;
      p.aoa_idx = r.detection->aoa_idx;
      p.doppler_idx = r.detection->doppler_idx;
      const RefinedPeak rp = extractor_.refine(p);
      r.detection->delay = cfg_.tx_delay() + rp.delay;
      r.detection->aoa = rp.aoa;
      r.detection->doppler = rp.doppler;
    }
  }
  r.fused = fuser_.push(r.time, r.detection);
  r.coefficient_valid = r.detection.has_value() && fuser_.last_kept();
  series_.push(r.time, r.coefficient, r.coefficient_valid);
  if (r.fused) {
    try {
      r.fused_position = bistatic_to_cartesian(*r.fused, cfg_);
    } catch (const Error&) {
      // the tracker counts the drop
    }
  }
  tracker_.step(r.time, r.fused);
  return r;
}

Spectrogram build_spectrogram(const CoefficientSeries& s, const SystemConfig& cfg) {
  return normalize_spectrogram(window_doppler_fft(interpolate_gaps(s), cfg));
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BenchResult run_bench(const SystemConfig& cfg, std::size_t cpis, std::uint64_t seed) {
  Scene scene;
  scene.static_paths.push_back(direct_path(cfg, 1.0));
  scene.scatterers.push_back({0.3, Trajectory::walk({{1.0, 3.0}, {3.5, 12.5}}, 1.0)});
  scene.impairments.noise_std = 0.05;
  scene.impairments.seed = seed;

  constexpr std::size_t kDistinct = 32;
  std::vector<CpiCube> cubes;
  for (std::size_t n = 0; n < kDistinct; ++n) {
    cubes.push_back(synth_cpi(scene, cfg, static_cast<double>(n) * 0.25));
  }

  Pipeline pipe(cfg);
  BenchResult res;
  res.latency_ms.reserve(cpis);
  for (std::size_t n = 0; n < cpis; ++n) {
    CpiCube& c = cubes[n % kDistinct];
    c.start_time = static_cast<double>(n) * cfg.md_sample_interval();
    const auto t0 = std::chrono::steady_clock::now();
    pipe.process(c);
    const auto t1 = std::chrono::steady_clock::now();
    res.latency_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  res.p50 = percentile(res.latency_ms, 0.50);
  res.p98 = percentile(res.latency_ms, 0.98);
  res.mean = res.latency_ms.empty() ? 0.0
                                    : std::accumulate(res.latency_ms.begin(), res.latency_ms.end(), 0.0) /
                                          static_cast<double>(res.latency_ms.size());
  res.max = res.latency_ms.empty() ? 0.0 : *std::max_element(res.latency_ms.begin(), res.latency_ms.end());
  return res;
}

}  // namespace powersense
