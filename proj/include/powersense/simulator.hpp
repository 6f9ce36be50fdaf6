#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "powersense/core.hpp"

namespace powersense {

struct StaticPath {
  double amplitude = 1.0;
  double delay = 0.0;  // s, absolute
  double aoa = 0.0;    // rad
};

struct Waypoint {
  double t = 0.0;
  Vec2 pos;
};

// Piecewise-linear path through timed waypoints, held constant outside the
// waypoint span. An optional sinusoidal swing along the direction of motion
// models limb micro-motion.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Waypoint> waypoints);

  static Trajectory stationary(Vec2 pos);
  static Trajectory linear(Vec2 start, Vec2 velocity, double t0, double t1);
  // Constant-speed walk through `corners`, starting at t0.
  static Trajectory walk(const std::vector<Vec2>& corners, double speed, double t0 = 0.0);

  Trajectory with_swing(double amplitude, double freq_hz, double phase) const;

  Vec2 position(double t) const;
  Vec2 velocity(double t) const;
  double start_time() const;
  double end_time() const;
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  double swing_amplitude() const { return swing_amp_; }
  double swing_freq() const { return swing_freq_; }
  double swing_phase() const { return swing_phase_; }

 private:
  std::size_t segment(double t) const;
  Vec2 base_position(double t) const;
  Vec2 base_velocity(double t) const;
  Vec2 heading(double t) const;

  std::vector<Waypoint> waypoints_;
  double swing_amp_ = 0.0;
  double swing_freq_ = 0.0;
  double swing_phase_ = 0.0;
};

struct DynamicScatterer {
  double amplitude = 0.3;
  Trajectory trajectory;
};

// Clock and hardware impairments. Timing offset phase is 2*pi*f_j*delta_k with
// delta_k uniform in [-to_jitter, to_jitter] per packet; CFO phase is
// 2*pi*cfo*t; hardware phase is fixed per antenna for a power cycle.
// Noise is complex Gaussian added to the channel before the phase factors.
struct ImpairmentModel {
  bool enabled = true;
  double to_jitter = 50e-9;       // s
  double cfo = 150.0;             // Hz
  std::vector<double> hw_phase;   // rad per antenna; empty draws from seed
  double noise_std = 0.0;
  std::uint64_t seed = 1;
};

struct Scene {
  std::vector<StaticPath> static_paths;
  std::vector<DynamicScatterer> scatterers;
  ImpairmentModel impairments;
  double duration = 0.0;  // s, used when streaming a whole scene
};

struct BistaticParams {
  double delay = 0.0;    // s, (|p - Tx| + |p - Rx|) / c
  double aoa = 0.0;      // rad, atan2(x, y)
  double doppler = 0.0;  // Hz, -(d/dt path) / lambda
};

BistaticParams bistatic_truth(Vec2 pos, Vec2 vel, const SystemConfig& cfg);

// Direct Tx-Rx path of the configured geometry.
StaticPath direct_path(const SystemConfig& cfg, double amplitude = 1.0);

// One CPI with scatterer geometry frozen at t0 (linear phase over the CPI).
CpiCube synth_cpi(const Scene& scene, const SystemConfig& cfg, double t0);

// CSI sample number `index` (time index * sample_interval) with exact geometry.
CsiRecord synth_sample(const Scene& scene, const SystemConfig& cfg, std::uint64_t index);

// Samples [first, first + count).
std::vector<CsiRecord> synth_stream(const Scene& scene, const SystemConfig& cfg, std::uint64_t first,
                                    std::uint64_t count);

// Scene text format; see README for the key list.
Scene parse_scene(const std::string& text, const SystemConfig& cfg);
Scene load_scene(const std::string& path, const SystemConfig& cfg);

}  // namespace powersense
