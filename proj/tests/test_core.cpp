#include <gtest/gtest.h>

#include <cmath>

#include "powersense/core.hpp"
#include "powersense/error.hpp"
#include "powersense/keyvalue.hpp"

using namespace powersense;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

}  // namespace

TEST(Config, DefaultsMatchReferenceSystem) {
  const auto cfg = SystemConfig::defaults();
  EXPECT_EQ(cfg.num_subcarriers(), 100u);
  EXPECT_EQ(cfg.num_antennas, 3u);
  EXPECT_DOUBLE_EQ(cfg.carrier_freq, 3.1e9);
  EXPECT_NEAR(cfg.effective_subcarrier_spacing(), 180e3, 1e-6);
  EXPECT_NEAR(cfg.antenna_spacing, cfg.wavelength() / 2.0, 1e-15);
  EXPECT_EQ(cfg.cpi_len, 128u);
  EXPECT_EQ(cfg.fft_bins_delay, 128u);
  EXPECT_EQ(cfg.fft_bins_aoa, 32u);
  EXPECT_EQ(cfg.fft_bins_doppler, 128u);
  EXPECT_DOUBLE_EQ(cfg.md_sample_interval(), 0.002);
  EXPECT_DOUBLE_EQ(cfg.md_sample_interval(), static_cast<double>(cfg.cpi_stride) * cfg.sample_interval);
  EXPECT_DOUBLE_EQ(cfg.tx_delay(), cfg.tx_range / kSpeedOfLight);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, TextRoundTrip) {
  auto cfg = SystemConfig::defaults();
  cfg.max_speed = 4.0;
  cfg.doppler_window = DopplerWindow::Hann;
  cfg.tracker.gate_distance = 1.5;
  const auto back = parse_config(format_config(cfg));
  EXPECT_EQ(format_config(back), format_config(cfg));
  EXPECT_DOUBLE_EQ(back.max_speed, 4.0);
  EXPECT_EQ(back.doppler_window, DopplerWindow::Hann);
  EXPECT_DOUBLE_EQ(back.tracker.gate_distance, 1.5);
}

TEST(Config, PartialTextKeepsDefaults) {
  const auto cfg = parse_config("# comment\nnum_antennas = 1\nsubcarrier_count = 30\n");
  EXPECT_EQ(cfg.num_antennas, 1u);
  EXPECT_EQ(cfg.num_subcarriers(), 30u);
  EXPECT_EQ(cfg.cpi_len, 128u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(code_of([] { parse_config("no_such_key = 1\n"); }), Errc::Parse);
  EXPECT_EQ(code_of([] { parse_config("cpi_len = abc\n"); }), Errc::Parse);
  EXPECT_EQ(code_of([] { parse_config("just text\n"); }), Errc::Parse);
}

TEST(Config, ValidationInvariants) {
  auto bad = [](auto mutate) {
    auto cfg = SystemConfig::defaults();
    mutate(cfg);
    return code_of([&] { cfg.validate(); });
  };
  EXPECT_EQ(bad([](SystemConfig& c) { c.subcarrier_freqs = {1.0}; }), Errc::InvalidConfig);
  EXPECT_EQ(bad([](SystemConfig& c) { std::swap(c.subcarrier_freqs[0], c.subcarrier_freqs[1]); }), Errc::InvalidConfig);
  EXPECT_EQ(bad([](SystemConfig& c) { c.num_antennas = 0; }), Errc::InvalidConfig);
  EXPECT_EQ(bad([](SystemConfig& c) { c.antenna_spacing = 0.0; }), Errc::InvalidConfig);
  EXPECT_EQ(bad([](SystemConfig& c) { c.cpi_len = 1; }), Errc::InvalidConfig);
  EXPECT_EQ(bad([](SystemConfig& c) { c.tx_aoa = kPi / 2.0; }), Errc::InvalidConfig);
  EXPECT_EQ(bad([](SystemConfig& c) { c.tx_range = 0.0; }), Errc::InvalidConfig);
  EXPECT_EQ(bad([](SystemConfig& c) { c.max_speed = -1.0; }), Errc::InvalidConfig);
}

TEST(Units, AoaBinToAngle) {
  const auto cfg = SystemConfig::defaults();
  EXPECT_NEAR(aoa_bin_to_angle(16, cfg), 0.0, 1e-15);
  EXPECT_NEAR(aoa_bin_to_angle(0, cfg), -kPi / 2.0, 1e-12);
  EXPECT_NEAR(aoa_bin_to_angle(24, cfg), kPi / 6.0, 1e-12);
  double prev = -10.0;
  for (std::size_t n = 0; n < 32; ++n) {
    const double a = aoa_bin_to_angle(n, cfg);
    EXPECT_GT(a, prev);
    prev = a;
    // inverse mapping recovers the bin for half-wavelength spacing
    const double back = (std::sin(a) * cfg.antenna_spacing / cfg.wavelength() + 0.5) * 32.0;
    EXPECT_NEAR(back, static_cast<double>(n), 1e-9);
  }
}

TEST(Units, AoaNonPhysicalBins) {
  auto cfg = SystemConfig::defaults();
  cfg.antenna_spacing = cfg.wavelength() / 4.0;
  EXPECT_EQ(code_of([&] { aoa_bin_to_angle(0, cfg); }), Errc::NonPhysicalBin);
  EXPECT_EQ(code_of([&] { aoa_bin_to_angle(7, cfg); }), Errc::NonPhysicalBin);
  EXPECT_EQ(code_of([&] { aoa_bin_to_angle(32, cfg); }), Errc::NonPhysicalBin);
  const auto axes = make_axes(cfg);
  // |n/32 - 0.5| <= d / lambda = 0.25 leaves bins 8..24
  ASSERT_EQ(axes.aoa_bins.size(), 17u);
  EXPECT_EQ(axes.aoa_bins.front(), 8);
  EXPECT_EQ(axes.aoa_bins.back(), 24);
  for (double a : axes.aoa_axis) EXPECT_LE(std::abs(a), kPi / 2.0);
}

TEST(Units, DopplerToVelocity) {
  const auto cfg = SystemConfig::defaults();
  EXPECT_DOUBLE_EQ(doppler_to_velocity(0.0, cfg), 0.0);
  EXPECT_NEAR(doppler_to_velocity(10.333, cfg), 1.0, 2e-3);
  EXPECT_NEAR(doppler_to_velocity(-51.67, cfg), -5.0, 1e-2);
  EXPECT_NEAR(doppler_to_velocity(3.0 * 7.0, cfg), 3.0 * doppler_to_velocity(7.0, cfg), 1e-12);
}

TEST(Units, DelayBinToRange) {
  const auto cfg = SystemConfig::defaults();
  EXPECT_DOUBLE_EQ(delay_bin_to_range(0, cfg), 0.0);
  EXPECT_NEAR(delay_bin_to_range(1, cfg), kSpeedOfLight / (128.0 * 180e3), 1e-9);
  EXPECT_NEAR(delay_bin_to_range(1, cfg), 13.01, 0.01);
  EXPECT_NEAR(delay_bin_to_range(10, cfg), 130.1, 0.1);
}

TEST(Axes, DefaultLayout) {
  const auto cfg = SystemConfig::defaults();
  const auto ax = make_axes(cfg);
  ASSERT_EQ(ax.delay_bins.size(), 63u);
  EXPECT_EQ(ax.delay_bins.front(), 1);
  EXPECT_EQ(ax.delay_bins.back(), 63);
  for (std::size_t n = 1; n < ax.delay_axis.size(); ++n) EXPECT_GT(ax.delay_axis[n], ax.delay_axis[n - 1]);
  EXPECT_GT(ax.delay_axis.front(), 0.0);
  EXPECT_EQ(ax.aoa_bins.size(), 32u);
  // 5 m/s at 3.1 GHz is 51.7 Hz, six bins of 7.8125 Hz
  ASSERT_EQ(ax.doppler_bins.size(), 13u);
  EXPECT_EQ(ax.doppler_bins.front(), -6);
  EXPECT_EQ(ax.doppler_bins.back(), 6);
  for (std::size_t n = 0; n < ax.doppler_axis.size(); ++n) {
    EXPECT_DOUBLE_EQ(ax.doppler_axis[n], -ax.doppler_axis[ax.doppler_axis.size() - 1 - n]);
  }
}

TEST(Axes, TwoSidedAndSingleAntenna) {
  auto cfg = SystemConfig::defaults();
  cfg.single_sided_delay = false;
  cfg.num_antennas = 1;
  const auto ax = make_axes(cfg);
  EXPECT_EQ(ax.delay_bins.size(), 127u);
  EXPECT_EQ(ax.delay_bins.front(), -63);
  ASSERT_EQ(ax.aoa_bins.size(), 1u);
  EXPECT_EQ(ax.aoa_axis.front(), 0.0);
}

TEST(KeyValue, RepeatedKeysAndComments) {
  const auto kv = KeyValueText::parse("a = 1\n# x = 2\nb = 2 # trailing\na = 3\n");
  ASSERT_EQ(kv.entries().size(), 3u);
  EXPECT_EQ(kv.get("a").value(), "3");
  EXPECT_EQ(kv.get_all("a").size(), 2u);
  EXPECT_EQ(kv.get("b").value(), "2");
  EXPECT_FALSE(kv.get("x").has_value());
  EXPECT_EQ(parse_number_list("1, 2 3", "v"), (std::vector<double>{1, 2, 3}));
}
