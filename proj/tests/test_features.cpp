#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "powersense/error.hpp"
#include "powersense/features.hpp"
#include "powersense/simulator.hpp"

using namespace powersense;
using namespace powersense::testing;

namespace {

SystemConfig unpadded_config() {
  auto cfg = SystemConfig::defaults();
  cfg.subcarrier_freqs = SystemConfig::uniform_grid(cfg.carrier_freq, 128, 180e3);
  return cfg;
}

PowerCube power_from(const SystemConfig& cfg, const std::function<double(std::size_t, std::size_t, std::size_t)>& f) {
  PowerCube p;
  p.data = Tensor3<double>(cfg.num_subcarriers(), cfg.num_antennas, cfg.cpi_len);
  for (std::size_t j = 0; j < p.data.dim(0); ++j)
    for (std::size_t i = 0; i < p.data.dim(1); ++i)
      for (std::size_t k = 0; k < p.data.dim(2); ++k) p.data(j, i, k) = f(j, i, k);
  return p;
}

std::size_t argmax_delay(const Tensor3<cplx>& x, std::size_t i, std::size_t k) {
  std::size_t best = 0;
  for (std::size_t d = 1; d < x.dim(0); ++d) {
    if (std::abs(x(d, i, k)) > std::abs(x(best, i, k))) best = d;
  }
  return best;
}

double energy(const Tensor3<cplx>& x) {
  double e = 0.0;
  for (const auto& v : x.flat()) e += std::norm(v);
  return e;
}

}  // namespace

TEST(CsiPower, MagnitudeSquared) {
  auto cfg = SystemConfig::defaults();
  CpiCube c;
  c.data = Tensor3<cplx>(2, 1, 2);
  c.data(0, 0, 0) = std::polar(1.0, 0.7);
  c.data(0, 0, 1) = std::polar(1.0, -2.9);
  c.data(1, 0, 0) = {3.0, 4.0};
  const auto p = compute_csi_power(c);
  EXPECT_NEAR(p.data(0, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(p.data(0, 0, 1), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(p.data(1, 0, 0), 25.0);
  EXPECT_DOUBLE_EQ(p.data(1, 0, 1), 0.0);
}

TEST(CsiPower, CrossTermOfTwoPathChannel) {
  const auto cfg = SystemConfig::defaults();
  const Vec2 pos{1.5, 5.0}, vel{0.4, -0.9};
  auto s = single_target_scene(cfg, pos, vel, 0.3, 0.0, 1);
  s.impairments.enabled = true;
  const double t0 = 0.2;
  const auto p = compute_csi_power(synth_cpi(s, cfg, t0));
  const auto b = bistatic_truth(pos + t0 * vel, vel, cfg);
  double worst = 0.0;
  for (std::size_t j = 0; j < cfg.num_subcarriers(); ++j) {
    for (std::size_t i = 0; i < cfg.num_antennas; ++i) {
      for (std::size_t k = 0; k < cfg.cpi_len; ++k) {
        const double f = cfg.subcarrier_freqs[j];
        const double tau_x = b.delay - b.doppler / cfg.carrier_freq * static_cast<double>(k) * cfg.sample_interval;
        const double spatial = static_cast<double>(i) * cfg.antenna_spacing * (std::sin(b.aoa) - std::sin(cfg.tx_aoa));
        const double phi = kTwoPi * f * ((tau_x - cfg.tx_delay()) - spatial / kSpeedOfLight);
        const double cross = p.data(j, i, k) - 1.0 - 0.09;
        worst = std::max(worst, std::abs(cross - 2.0 * 0.3 * std::cos(phi)));
      }
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(DelayTransform, FlatSpectrumVanishesWithoutPadding) {
  const auto cfg = unpadded_config();
  const auto x = delay_transform(power_from(cfg, [](auto, auto, auto) { return 2.5; }), cfg);
  EXPECT_EQ(x.dim(0), 63u);
  for (const auto& v : x.flat()) EXPECT_LE(std::abs(v), 1e-9);
}

TEST(DelayTransform, CosineOnBinCentre) {
  for (const auto& cfg : {unpadded_config(), SystemConfig::defaults()}) {
    const double df = cfg.effective_subcarrier_spacing();
    const int m0 = 5;
    const double tau0 = m0 / (static_cast<double>(cfg.fft_bins_delay) * df);
    const auto x = delay_transform(
        power_from(cfg, [&](std::size_t j, auto, auto) { return std::cos(kTwoPi * cfg.subcarrier_freqs[j] * tau0); }),
        cfg);
    const auto axes = make_axes(cfg);
    EXPECT_EQ(axes.delay_bins[argmax_delay(x, 0, 0)], m0);
    if (cfg.num_subcarriers() == cfg.fft_bins_delay) {
      EXPECT_NEAR(std::abs(x(m0 - 1, 0, 0)), 64.0, 1e-9);
    }
  }
}

TEST(DelayTransform, CosineBetweenBins) {
  const auto cfg = SystemConfig::defaults();
  const double df = cfg.effective_subcarrier_spacing();
  const double m0 = 7.4;
  const double tau0 = m0 / (128.0 * df);
  const auto x = delay_transform(
      power_from(cfg, [&](std::size_t j, auto, auto) { return std::cos(kTwoPi * cfg.subcarrier_freqs[j] * tau0); }),
      cfg);
  const int got = make_axes(cfg).delay_bins[argmax_delay(x, 0, 0)];
  EXPECT_LE(std::abs(got - m0), 1.0);
  EXPECT_GT(std::abs(x(got, 0, 0)), 0.0);  // leakage into the neighbour
}

TEST(StaticClutter, ConstantBecomesZero) {
  Tensor3<cplx> x(3, 2, 16, cplx{1.5, -2.0});
  const auto y = remove_static_clutter(x);
  for (const auto& v : y.flat()) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(StaticClutter, SinusoidPreserved) {
  Tensor3<cplx> full(1, 1, 64), part(1, 1, 50);
  for (std::size_t k = 0; k < 64; ++k) full(0, 0, k) = 3.0 + std::sin(kTwoPi * 4.0 * static_cast<double>(k) / 64.0);
  auto y = remove_static_clutter(full);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_NEAR(y(0, 0, k).real(), full(0, 0, k).real() - 3.0, 1e-12);

  double mean = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    part(0, 0, k) = 3.0 + std::sin(0.37 * static_cast<double>(k));
    mean += std::sin(0.37 * static_cast<double>(k));
  }
  // closed-form mean of the truncated sinusoid
  const double analytic = std::sin(0.37 * 49 / 2.0) * std::sin(0.37 * 50 / 2.0) / std::sin(0.37 / 2.0) / 50.0;
  EXPECT_NEAR(mean / 50.0, analytic, 1e-12);
  y = remove_static_clutter(part);
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_NEAR(y(0, 0, k).real(), std::sin(0.37 * static_cast<double>(k)) - analytic, 1e-12);
  }
}

TEST(StaticClutter, StaticEnergySuppressed) {
  const auto cfg = SystemConfig::defaults();
  Scene stat;
  stat.static_paths = {direct_path(cfg, 1.0), {0.5, cfg.tx_delay() + 3e-8, deg_to_rad(25.0)}};
  const auto pre = delay_transform(compute_csi_power(synth_cpi(stat, cfg, 0.0)), cfg);
  const auto post = remove_static_clutter(pre);
  ASSERT_GT(energy(pre), 0.0);
  EXPECT_LE(10.0 * std::log10((energy(post) + 1e-300) / energy(pre)), -30.0);

  auto moving = stat;
  moving.scatterers.push_back({0.3, Trajectory::linear({1.0, 4.0}, {0.7, 0.7}, 0.0, 10.0)});
  const auto kept = remove_static_clutter(delay_transform(compute_csi_power(synth_cpi(moving, cfg, 0.0)), cfg));
  EXPECT_GT(energy(kept), 1e-3 * energy(pre));
}

TEST(Compensation, IdentityCases) {
  auto cfg = SystemConfig::defaults();
  Tensor3<cplx> x(2, 3, 4);
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (auto& v : x.flat()) v = {g(rng), g(rng)};
  cfg.tx_aoa = 0.0;
  EXPECT_TRUE(compensate_tx_angle(x, cfg) == x);

  cfg = SystemConfig::defaults();
  cfg.num_antennas = 1;
  Tensor3<cplx> one(2, 1, 4);
  for (auto& v : one.flat()) v = {g(rng), g(rng)};
  EXPECT_TRUE(compensate_tx_angle(one, cfg) == one);
}

TEST(AoaDoppler, ZeroInputZeroTensor) {
  const auto cfg = SystemConfig::defaults();
  const auto t = aoa_doppler_spectrum(Tensor3<cplx>(63, 3, 128), cfg);
  EXPECT_EQ(t.data.dims(), (std::array<std::size_t, 3>{63, 32, 13}));
  for (const auto& v : t.data.flat()) EXPECT_EQ(v, cplx{});
  EXPECT_THROW(aoa_doppler_spectrum(Tensor3<cplx>(62, 3, 128), cfg), Error);
}

TEST(AoaDoppler, PlaneWaveOnBinCentre) {
  const auto cfg = SystemConfig::defaults();
  Tensor3<cplx> x(63, 3, 128);
  const double u = cfg.antenna_spacing * 0.5 / cfg.wavelength();
  const double fd = 31.25;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 128; ++k)
      x(10, i, k) = std::polar(1.0, kTwoPi * (static_cast<double>(i) * u + fd * static_cast<double>(k) * 1e-3));
  const auto t = aoa_doppler_spectrum(x, cfg);
  const auto p = find_global_peak(t);
  EXPECT_EQ(p.delay_idx, 10u);
  EXPECT_EQ(t.aoa_bins[p.aoa_idx], 24);
  EXPECT_NEAR(p.aoa, kPi / 6.0, 1e-12);
  EXPECT_EQ(t.doppler_bins[p.doppler_idx], 4);
  EXPECT_DOUBLE_EQ(p.doppler, 31.25);
  EXPECT_NEAR(p.magnitude, 3.0 * 128.0, 1e-9);
}

TEST(AoaDoppler, DopplerSignFollowsMotion) {
  const auto cfg = SystemConfig::defaults();
  const Vec2 p{-1.0, 5.0};
  for (double s : {1.0, -1.0}) {
    const Vec2 v = (s * 1.2 / norm(p)) * p;  // receding for s > 0
    const auto t = extract_features(synth_cpi(single_target_scene(cfg, p, v, 0.3, 0.0, 2), cfg, 0.0), cfg);
    const double truth = bistatic_truth(p, v, cfg).doppler;
    const auto pk = find_global_peak(t);
    EXPECT_EQ(pk.doppler > 0.0, truth > 0.0);
    EXPECT_EQ(truth < 0.0, s > 0.0);
  }
}

TEST(GlobalPeak, SingleBinAndTieBreaks) {
  const auto cfg = SystemConfig::defaults();
  FeatureTensor t = aoa_doppler_spectrum(Tensor3<cplx>(63, 3, 128), cfg);
  t.data(4, 7, 2) = {0.0, 2.0};
  auto p = find_global_peak(t);
  EXPECT_EQ(p.delay_idx, 4u);
  EXPECT_EQ(p.aoa_idx, 7u);
  EXPECT_EQ(p.doppler_idx, 2u);
  EXPECT_DOUBLE_EQ(p.delay, t.delay_axis[4]);
  EXPECT_DOUBLE_EQ(p.magnitude, 2.0);

  t.data(4 + 3, 7, 2) = {2.0, 0.0};
  EXPECT_EQ(find_global_peak(t).delay_idx, 4u);

  t.data.fill({});
  t.data(5, 9, 0) = 1.0;   // -6 bins
  t.data(5, 3, 8) = 1.0;   // +2 bins
  t.data(5, 20, 4) = 1.0;  // -2 bins
  p = find_global_peak(t);
  EXPECT_EQ(p.doppler_idx, 8u);
  EXPECT_EQ(p.aoa_idx, 3u);
  t.data(5, 1, 8) = 1.0;
  EXPECT_EQ(find_global_peak(t).aoa_idx, 1u);

  FeatureTensor empty;
  try {
    find_global_peak(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyTensor);
  }
}

TEST(GlobalPeak, SimulatedSceneWithinOneBin) {
  const auto cfg = SystemConfig::defaults();
  const Vec2 p{2.0, 7.0}, v{-0.8, -0.9};
  const auto t = extract_features(synth_cpi(single_target_scene(cfg, p, v, 0.3, 0.05, 4), cfg, 0.0), cfg);
  const auto pk = find_global_peak(t);
  const auto b = bistatic_truth(p + 0.0635 * v, v, cfg);
  const double sin_bin = 2.0 * cfg.antenna_spacing / cfg.wavelength() / 32.0;
  EXPECT_LE(std::abs(pk.delay - (b.delay - cfg.tx_delay())), cfg.delay_resolution());
  EXPECT_LE(std::abs(std::sin(pk.aoa) - std::sin(b.aoa)), sin_bin);
  EXPECT_LE(std::abs(pk.doppler - b.doppler), cfg.doppler_resolution());
}

TEST(ExtractFeatures, ZeroInputAndComposition) {
  const auto cfg = SystemConfig::defaults();
  CpiCube zero;
  zero.data = Tensor3<cplx>(100, 3, 128);
  const auto z = extract_features(zero, cfg);
  for (const auto& v : z.data.flat()) EXPECT_EQ(v, cplx{});

  const auto cube = synth_cpi(single_target_scene(cfg, {1.0, 4.0}, {0.6, 0.6}, 0.3, 0.05, 8), cfg, 0.3);
  const auto fast = extract_features(cube, cfg);
  const auto staged = aoa_doppler_spectrum(
      compensate_tx_angle(remove_static_clutter(delay_transform(compute_csi_power(cube), cfg)), cfg), cfg,
      cube.start_time);
  EXPECT_LE(relative_frobenius(fast.data, staged.data), 1e-9);
  EXPECT_DOUBLE_EQ(fast.time, staged.time);
  EXPECT_NEAR(fast.time, 0.3 + 0.0635, 1e-12);
}

TEST(ExtractFeatures, PhaseOffsetInvariance) {
  const auto cfg = SystemConfig::defaults();
  auto a = single_target_scene(cfg, {2.5, 6.0}, {-0.5, 0.8}, 0.3, 0.05, 12);
  auto b = a;
  a.impairments.enabled = false;
  b.impairments.cfo = 900.0;
  b.impairments.to_jitter = 2e-7;
  const auto ta = extract_features(synth_cpi(a, cfg, 0.0), cfg);
  const auto tb = extract_features(synth_cpi(b, cfg, 0.0), cfg);
  EXPECT_LE(relative_frobenius(tb.data, ta.data), 1e-9);
}

TEST(ExtractFeatures, MirrorIsWeaker) {
  const auto cfg = SystemConfig::defaults();
  const Vec2 p{1.0, 5.0}, v{0.3, -1.2};
  const auto t = extract_features(synth_cpi(single_target_scene(cfg, p, v, 0.3, 0.0, 1), cfg, 0.0), cfg);
  const auto pk = find_global_peak(t);
  const std::size_t mirror = t.doppler_bins.size() - 1 - pk.doppler_idx;
  ASSERT_NE(mirror, pk.doppler_idx);
  EXPECT_LT(std::abs(t.data(pk.delay_idx, pk.aoa_idx, mirror)), std::abs(t.data(pk.delay_idx, pk.aoa_idx, pk.doppler_idx)));
}

TEST(ExtractFeatures, LinearInPower) {
  const auto cfg = SystemConfig::defaults();
  auto cube = synth_cpi(single_target_scene(cfg, {1.0, 6.0}, {0.8, 0.2}, 0.3, 0.05, 6), cfg, 0.0);
  const auto base = extract_features(cube, cfg);
  for (auto& v : cube.data.flat()) v *= std::sqrt(2.5);
  const auto scaled = extract_features(cube, cfg);
  for (std::size_t n = 0; n < base.data.size(); ++n) {
    EXPECT_NEAR(std::abs(scaled.data.flat()[n]), 2.5 * std::abs(base.data.flat()[n]), 1e-9 * (1.0 + std::abs(base.data.flat()[n])));
  }
  EXPECT_EQ(find_global_peak(scaled).doppler_idx, find_global_peak(base).doppler_idx);
}

TEST(ExtractFeatures, NonUniformGridIsRegridded) {
  auto cfg = SystemConfig::defaults();
  auto f = cfg.subcarrier_freqs;
  f.erase(f.begin() + 40, f.begin() + 45);  // a hole in the band
  cfg.subcarrier_freqs = f;
  ASSERT_FALSE(cfg.subcarriers_uniform());
  const Vec2 p{1.5, 5.0}, v{0.0, -1.4};
  const auto cube = synth_cpi(single_target_scene(cfg, p, v, 0.3, 0.0, 3), cfg, 0.0);
  const auto pr = regrid_uniform(compute_csi_power(cube), cfg);
  EXPECT_EQ(pr.data.dim(0), cfg.num_subcarriers());
  EXPECT_DOUBLE_EQ(pr.data(0, 0, 0), compute_csi_power(cube).data(0, 0, 0));
  const auto pk = find_global_peak(extract_features(cube, cfg));
  EXPECT_LE(std::abs(pk.doppler - bistatic_truth(p, v, cfg).doppler), cfg.doppler_resolution());
}

TEST(ExtractFeatures, HannWindowAndSingleAntenna) {
  auto cfg = SystemConfig::defaults();
  cfg.doppler_window = DopplerWindow::Hann;
  const Vec2 p{1.0, 5.0}, v{0.0, -1.5};
  auto pk = find_global_peak(extract_features(synth_cpi(single_target_scene(cfg, p, v, 0.3, 0.0, 3), cfg, 0.0), cfg));
  EXPECT_LE(std::abs(pk.doppler - bistatic_truth(p, v, cfg).doppler), cfg.doppler_resolution());

  cfg = SystemConfig::defaults();
  cfg.num_antennas = 1;
  const auto t = extract_features(synth_cpi(single_target_scene(cfg, p, v, 0.3, 0.0, 3), cfg, 0.0), cfg);
  EXPECT_EQ(t.data.dim(1), 1u);
  pk = find_global_peak(t);
  EXPECT_LE(std::abs(pk.doppler - bistatic_truth(p, v, cfg).doppler), cfg.doppler_resolution());
}

TEST(Refinement, ContinuousEstimates) {
  const auto cfg = SystemConfig::defaults();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> px(-4, 6), py(2, 11), ang(0, kTwoPi), spd(0.6, 1.6);
  FeatureExtractor fx(cfg);
  int tested = 0;
  while (tested < 20) {
    const Vec2 p{px(rng), py(rng)};
    const double a = ang(rng), s = spd(rng);
    const Vec2 v{s * std::cos(a), s * std::sin(a)};
    const auto b = bistatic_truth(p + 0.0635 * v, v, cfg);
    if (std::abs(b.doppler) < 8.0 || std::abs(b.doppler) > 45.0 || norm(p - cfg.tx_position()) < 1.0) continue;
    ++tested;
    const auto& t = fx.run(synth_cpi(single_target_scene(cfg, p, v, 0.3, 0.05, 100 + tested), cfg, 0.0));
    const auto r = fx.refine(find_global_peak(t));
    // a tenth of a delay bin, a quarter of a Doppler bin
    EXPECT_LE(std::abs(r.delay - (b.delay - cfg.tx_delay())), 0.1 * cfg.delay_resolution()) << p.x << "," << p.y;
    EXPECT_LE(std::abs(rad_to_deg(r.aoa - b.aoa)), 3.0) << p.x << "," << p.y;
    EXPECT_LE(std::abs(r.doppler - b.doppler), 0.25 * cfg.doppler_resolution()) << p.x << "," << p.y;
  }
}

TEST(DopplerProfile, SumsOverDelayAndAoa) {
  const auto cfg = SystemConfig::defaults();
  FeatureTensor t = aoa_doppler_spectrum(Tensor3<cplx>(63, 3, 128), cfg);
  t.data(1, 2, 3) = {3.0, 4.0};
  t.data(9, 0, 3) = 1.0;
  t.data(2, 2, 5) = 2.0;
  const auto prof = doppler_profile(t);
  EXPECT_DOUBLE_EQ(prof[3], 26.0);
  EXPECT_DOUBLE_EQ(prof[5], 4.0);
  EXPECT_DOUBLE_EQ(prof[0], 0.0);
}
