#include "powersense/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "powersense/error.hpp"

namespace powersense {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Parse: return "Parse";
    case Errc::Io: return "Io";
    case Errc::NonPhysicalBin: return "NonPhysicalBin";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::TrajectoryOutOfBounds: return "TrajectoryOutOfBounds";
    case Errc::EmptyTensor: return "EmptyTensor";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::AllZero: return "AllZero";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TruncatedRecord: return "TruncatedRecord";
    case Errc::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::MalformedDatagram: return "MalformedDatagram";
  }
  return "Unknown";
}

double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

SystemConfig SystemConfig::defaults() {
  SystemConfig cfg;
  cfg.subcarrier_freqs = uniform_grid(cfg.carrier_freq, 100, 180e3);
  cfg.antenna_spacing = cfg.wavelength() / 2.0;
  return cfg;
}

std::vector<double> SystemConfig::uniform_grid(double carrier, std::size_t count, double spacing) {
  std::vector<double> f(count);
  const double mid = (static_cast<double>(count) - 1.0) / 2.0;
  for (std::size_t j = 0; j < count; ++j) {
    f[j] = carrier + (static_cast<double>(j) - mid) * spacing;
  }
  return f;
}

Vec2 SystemConfig::tx_position() const {
  return {tx_range * std::sin(tx_aoa), tx_range * std::cos(tx_aoa)};
}

double SystemConfig::effective_subcarrier_spacing() const {
  const std::size_t n = subcarrier_freqs.size();
  if (n < 2) return 0.0;
  return (subcarrier_freqs.back() - subcarrier_freqs.front()) / static_cast<double>(n - 1);
}

bool SystemConfig::subcarriers_uniform() const {
  const double df = effective_subcarrier_spacing();
  for (std::size_t j = 1; j < subcarrier_freqs.size(); ++j) {
    const double step = subcarrier_freqs[j] - subcarrier_freqs[j - 1];
    if (std::abs(step - df) > 1e-6 * df) return false;
  }
  return true;
}

double SystemConfig::doppler_resolution() const {
  return 1.0 / (static_cast<double>(fft_bins_doppler) * sample_interval);
}

double SystemConfig::delay_resolution() const {
  return 1.0 / (static_cast<double>(fft_bins_delay) * effective_subcarrier_spacing());
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
  if (!(carrier_freq > 0.0)) fail("carrier_freq must be positive");
  if (subcarrier_freqs.size() < 2) fail("need at least two subcarriers");
  for (std::size_t j = 1; j < subcarrier_freqs.size(); ++j) {
    if (!(subcarrier_freqs[j] > subcarrier_freqs[j - 1])) fail("subcarrier_freqs must be strictly increasing");
  }
  if (num_antennas < 1) fail("num_antennas must be >= 1");
  if (!(antenna_spacing > 0.0)) fail("antenna_spacing must be positive");
  if (!(sample_interval > 0.0)) fail("sample_interval must be positive");
  if (cpi_len < 2) fail("cpi_len must be >= 2");
  if (fft_bins_delay < 4 || fft_bins_aoa < 2 || fft_bins_doppler < 2) fail("FFT bin counts too small");
  if (subcarrier_freqs.size() > fft_bins_delay) fail("fft_bins_delay must cover the subcarrier count");
  if (num_antennas > fft_bins_aoa) fail("fft_bins_aoa must cover the antenna count");
  if (cpi_len > fft_bins_doppler) fail("fft_bins_doppler must cover cpi_len");
  if (!(std::abs(tx_aoa) < kPi / 2.0)) fail("|tx_aoa| must be below 90 degrees");
  if (!(tx_range > 0.0)) fail("tx_range must be positive");
  if (!(max_speed > 0.0)) fail("max_speed must be positive");
  if (!(zscore_threshold > 0.0)) fail("zscore_threshold must be positive");
  if (!(fusion_window > 0.0)) fail("fusion_window must be positive");
  if (cpi_stride < 1) fail("cpi_stride must be >= 1");
  if (md_window_len < 2 || md_fft_len < md_window_len) fail("md_fft_len must be >= md_window_len >= 2");
  if (!(max_missing_fraction >= 0.0 && max_missing_fraction < 1.0)) fail("max_missing_fraction must be in [0, 1)");
  if (reorder_window < 1) fail("reorder_window must be >= 1");
  if (tracker.delete_misses < 1 || tracker.confirm_age < 0) fail("tracker lifecycle thresholds invalid");
}

double aoa_bin_to_angle(std::size_t bin, const SystemConfig& cfg) {
  if (bin >= cfg.fft_bins_aoa) {
    throw Error(Errc::NonPhysicalBin, "AoA bin " + std::to_string(bin) + " out of range");
  }
  const double arg = cfg.wavelength() / cfg.antenna_spacing *
                     (static_cast<double>(bin) / static_cast<double>(cfg.fft_bins_aoa) - 0.5);
  if (std::abs(arg) > 1.0 + 1e-12) {
    throw Error(Errc::NonPhysicalBin, "AoA bin " + std::to_string(bin) + " maps outside [-1, 1]");
  }
  return std::asin(std::clamp(arg, -1.0, 1.0));
}

double doppler_to_velocity(double doppler_hz, const SystemConfig& cfg) {
  return kSpeedOfLight * doppler_hz / cfg.carrier_freq;
}

double delay_bin_to_range(std::size_t bin, const SystemConfig& cfg) {
  return kSpeedOfLight * static_cast<double>(bin) * cfg.delay_resolution();
}

AxisLayout make_axes(const SystemConfig& cfg) {
  AxisLayout ax;
  const double tau_res = cfg.delay_resolution();
  const int half = static_cast<int>(cfg.max_delay_bin());
  const int first = cfg.single_sided_delay ? 1 : -half;
  for (int m = first; m <= half; ++m) {
    ax.delay_bins.push_back(m);
    ax.delay_axis.push_back(m * tau_res);
  }

  if (cfg.num_antennas == 1) {
    ax.aoa_bins.push_back(static_cast<int>(cfg.fft_bins_aoa / 2));
    ax.aoa_axis.push_back(0.0);
  } else {
    for (std::size_t n = 0; n < cfg.fft_bins_aoa; ++n) {
      try {
        ax.aoa_axis.push_back(aoa_bin_to_angle(n, cfg));
        ax.aoa_bins.push_back(static_cast<int>(n));
      } catch (const Error&) {
        // non-physical bins are dropped from the axis
      }
    }
  }

  const double f_res = cfg.doppler_resolution();
  const double f_max = cfg.max_speed * cfg.carrier_freq / kSpeedOfLight;
  const int nd = static_cast<int>(cfg.fft_bins_doppler);
  for (int b = -nd / 2; b < nd - nd / 2; ++b) {
    const double f = b * f_res;
    if (std::abs(f) <= f_max + 1e-9 && std::abs(b) < nd / 2) {
      ax.doppler_bins.push_back(b);
      ax.doppler_axis.push_back(f);
    }
  }
  return ax;
}

}  // namespace powersense
