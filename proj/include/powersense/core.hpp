#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "powersense/tensor.hpp"

namespace powersense {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

double norm(Vec2 v);
double dot(Vec2 a, Vec2 b);

enum class DopplerWindow { Rectangular, Hann };

// Tracker tuning. Gates and lifecycle thresholds follow the reference
// implementation; noise levels are sized to the bin resolutions.
struct TrackerParams {
  double gate_distance = 2.0;        // m
  int confirm_age = 20;              // frames; confirmation needs age > this
  double confirm_visibility = 0.6;   // hits / age
  int confirm_max_misses = 5;        // consecutive misses must stay below this
  int delete_misses = 20;            // consecutive misses before deletion
  double init_accel = 0.1;           // m/s^2 per axis at track birth
  double jerk_psd = 1.0;             // m^2/s^5, white-jerk process noise
  double meas_pos_std = 0.3;         // m
  double meas_vel_std = 0.1;         // m/s
  double init_pos_std = 1.0;         // m
  double init_vel_std = 1.0;         // m/s
  double init_accel_std = 0.5;       // m/s^2
};

// Radio, geometry and processing constants. Immutable once loaded.
// Geometry: receive array at the origin, elements along +x spaced by
// antenna_spacing, broadside along +y; angles measured from +y toward +x.
struct SystemConfig {
  double carrier_freq = 3.1e9;                 // Hz
  std::vector<double> subcarrier_freqs;        // Hz, strictly increasing
  std::size_t num_antennas = 3;
  double antenna_spacing = 0.0;                // m; 0 means half wavelength
  double sample_interval = 1e-3;               // s
  std::size_t cpi_len = 128;
  std::size_t fft_bins_delay = 128;
  std::size_t fft_bins_aoa = 32;
  std::size_t fft_bins_doppler = 128;
  double tx_range = 6.0;                       // m
  double tx_aoa = deg_to_rad(-30.0);           // rad
  double max_speed = 5.0;                      // m/s
  double snr_threshold_db = 5.0;               // dB
  double zscore_threshold = 3.0;
  double fusion_window = 1.5;                  // s
  std::size_t cpi_stride = 2;                  // samples
  std::size_t md_window_len = 64;
  std::size_t md_fft_len = 128;
  DopplerWindow doppler_window = DopplerWindow::Rectangular;
  bool refine_peak = true;
  bool single_sided_delay = true;
  double max_missing_fraction = 0.1;
  std::size_t reorder_window = 8;
  TrackerParams tracker;

  // Defaults: 100 pilot subcarriers at 180 kHz around 3.1 GHz, 3 Rx.
  static SystemConfig defaults();
  // Uniform grid of `count` subcarriers centred on the carrier.
  static std::vector<double> uniform_grid(double carrier, std::size_t count, double spacing);

  std::size_t num_subcarriers() const { return subcarrier_freqs.size(); }
  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  double tx_delay() const { return tx_range / kSpeedOfLight; }
  Vec2 tx_position() const;
  double md_sample_interval() const { return static_cast<double>(cpi_stride) * sample_interval; }
  // Uniform spacing of the grid the delay transform runs on.
  double effective_subcarrier_spacing() const;
  bool subcarriers_uniform() const;
  double doppler_resolution() const;  // Hz per Doppler bin
  double delay_resolution() const;    // s per delay bin
  // Highest retained delay bin index (bins 1..this are kept).
  std::size_t max_delay_bin() const { return fft_bins_delay / 2 - 1; }

  // Throws Error(InvalidConfig) when an invariant is violated.
  void validate() const;
};

// Loads `key = value` text. Unknown keys are rejected.
SystemConfig load_config(const std::string& path);
SystemConfig parse_config(const std::string& text);
std::string format_config(const SystemConfig& cfg);

// One CSI sample: payload is subcarrier-major, index j * num_antennas + i.
struct CsiRecord {
  double timestamp = 0.0;
  std::vector<std::complex<float>> payload;
};

// One coherent processing interval, shape subcarriers x antennas x time.
struct CpiCube {
  Tensor3<cplx> data;
  double start_time = 0.0;
  std::uint64_t seq = 0;
  std::size_t filled_samples = 0;  // samples repeated to cover gaps
};

// Delay x AoA x Doppler tensor. Delay is relative to the direct Tx-Rx path.
struct FeatureTensor {
  Tensor3<cplx> data;
  std::vector<double> delay_axis;    // s
  std::vector<double> aoa_axis;      // rad
  std::vector<double> doppler_axis;  // Hz, ascending
  // FFT bin each retained index came from (delay bins are signed).
  std::vector<int> delay_bins;
  std::vector<int> aoa_bins;         // 0..N_theta-1, after fftshift
  std::vector<int> doppler_bins;     // signed, 0 Hz == 0
  double start_time = 0.0;
  double time = 0.0;                 // CPI centre
};

struct Detection {
  double delay = 0.0;    // s, absolute bistatic delay
  double aoa = 0.0;      // rad
  double doppler = 0.0;  // Hz, positive when the bistatic path shrinks
  double snr_db = 0.0;
  double time = 0.0;     // s
  bool valid = false;
  // Peak indices into the FeatureTensor it came from.
  std::size_t delay_idx = 0;
  std::size_t aoa_idx = 0;
  std::size_t doppler_idx = 0;
};

double aoa_bin_to_angle(std::size_t bin, const SystemConfig& cfg);
// Signed speed c * f_d / f_c; positive for a shrinking bistatic path.
double doppler_to_velocity(double doppler_hz, const SystemConfig& cfg);
// Excess path length (m) of delay bin m.
double delay_bin_to_range(std::size_t bin, const SystemConfig& cfg);

// Retained bins and their physical coordinates for a configuration.
struct AxisLayout {
  std::vector<int> delay_bins;
  std::vector<double> delay_axis;
  std::vector<int> aoa_bins;
  std::vector<double> aoa_axis;
  std::vector<int> doppler_bins;
  std::vector<double> doppler_axis;
};

AxisLayout make_axes(const SystemConfig& cfg);

}  // namespace powersense
