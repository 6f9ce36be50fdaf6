#include "powersense/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <random>

#include "powersense/error.hpp"
#include "powersense/keyvalue.hpp"

namespace powersense {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kImpairmentStream = 2;
constexpr std::uint64_t kHardwareStream = 3;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::vector<double> hardware_phases(const ImpairmentModel& imp, std::size_t num_antennas) {
  if (!imp.hw_phase.empty()) {
    if (imp.hw_phase.size() != num_antennas) {
      throw Error(Errc::InvalidConfig, "hw_phase needs one entry per antenna");
    }
    return imp.hw_phase;
  }
  auto rng = make_rng(imp.seed, 0, kHardwareStream);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> out(num_antennas);
  for (auto& p : out) p = u(rng);
  return out;
}

// exp(-j*(phi_TO + phi_CFO)) per subcarrier and exp(-j*phi_h) per antenna,
// folded into one factor per (j, i).
void apply_impairments(std::span<cplx> sample, const ImpairmentModel& imp, const SystemConfig& cfg,
                       const std::vector<double>& hw, std::uint64_t index) {
  if (!imp.enabled) return;
  auto rng = make_rng(imp.seed, index, kImpairmentStream);
  std::uniform_real_distribution<double> u(-imp.to_jitter, imp.to_jitter);
  const double delta = imp.to_jitter > 0.0 ? u(rng) : 0.0;
  const double t = static_cast<double>(index) * cfg.sample_interval;
  const double cfo_phase = kTwoPi * imp.cfo * t;
  const std::size_t na = cfg.num_antennas;
  for (std::size_t j = 0; j < cfg.num_subcarriers(); ++j) {
    const double to_phase = std::fmod(kTwoPi * cfg.subcarrier_freqs[j] * delta, kTwoPi);
    for (std::size_t i = 0; i < na; ++i) {
      sample[j * na + i] *= std::polar(1.0, -(to_phase + cfo_phase + hw[i]));
    }
  }
}

void add_noise(std::span<cplx> sample, const ImpairmentModel& imp, std::uint64_t index) {
  if (imp.noise_std <= 0.0) return;
  auto rng = make_rng(imp.seed, index, kNoiseStream);
  std::normal_distribution<double> g(0.0, imp.noise_std / std::sqrt(2.0));
  for (auto& v : sample) {
    const double re = g(rng);
    const double im = g(rng);
    v += cplx(re, im);
  }
}

// Adds amplitude * exp(-j 2 pi f_j (delay - i*d*sin(aoa)/c)) for every (j, i).
void add_path(std::span<cplx> sample, const SystemConfig& cfg, double amplitude, double delay, double aoa) {
  const std::size_t na = cfg.num_antennas;
  const double spatial = cfg.antenna_spacing * std::sin(aoa) / kSpeedOfLight;
  for (std::size_t j = 0; j < cfg.num_subcarriers(); ++j) {
    const double f = cfg.subcarrier_freqs[j];
    for (std::size_t i = 0; i < na; ++i) {
      const double tau = delay - static_cast<double>(i) * spatial;
      // reduce before scaling to keep the phase argument small
      const double cycles = f * tau;
      sample[j * na + i] += std::polar(amplitude, -kTwoPi * (cycles - std::floor(cycles)));
    }
  }
}

BistaticParams checked_truth(Vec2 pos, Vec2 vel, const SystemConfig& cfg) {
  try {
    return bistatic_truth(pos, vel, cfg);
  } catch (const Error& e) {
    throw Error(Errc::TrajectoryOutOfBounds, e.what());
  }
}

}  // namespace

// --- Trajectory -------------------------------------------------------------

Trajectory::Trajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw Error(Errc::InvalidConfig, "trajectory needs at least one waypoint");
  for (std::size_t k = 1; k < waypoints_.size(); ++k) {
    if (!(waypoints_[k].t > waypoints_[k - 1].t)) {
      throw Error(Errc::InvalidConfig, "waypoint times must be strictly increasing");
    }
  }
}

Trajectory Trajectory::stationary(Vec2 pos) { return Trajectory({{0.0, pos}}); }

Trajectory Trajectory::linear(Vec2 start, Vec2 velocity, double t0, double t1) {
  return Trajectory({{t0, start}, {t1, start + (t1 - t0) * velocity}});
}

Trajectory Trajectory::walk(const std::vector<Vec2>& corners, double speed, double t0) {
  if (corners.empty() || !(speed > 0.0)) throw Error(Errc::InvalidConfig, "walk needs corners and positive speed");
  std::vector<Waypoint> wps{{t0, corners.front()}};
  for (std::size_t k = 1; k < corners.size(); ++k) {
    const double len = norm(corners[k] - corners[k - 1]);
    wps.push_back({wps.back().t + len / speed, corners[k]});
  }
  return Trajectory(std::move(wps));
}

Trajectory Trajectory::with_swing(double amplitude, double freq_hz, double phase) const {
  Trajectory t = *this;
  t.swing_amp_ = amplitude;
  t.swing_freq_ = freq_hz;
  t.swing_phase_ = phase;
  return t;
}

double Trajectory::start_time() const { return waypoints_.empty() ? 0.0 : waypoints_.front().t; }
double Trajectory::end_time() const { return waypoints_.empty() ? 0.0 : waypoints_.back().t; }

std::size_t Trajectory::segment(double t) const {
  // index k with wp[k].t <= t < wp[k+1].t, clamped to valid segments
  auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t; });
  std::size_t k = static_cast<std::size_t>(std::distance(waypoints_.begin(), it));
  k = (k == 0) ? 0 : k - 1;
  return std::min(k, waypoints_.size() - 2);
}

Vec2 Trajectory::base_position(double t) const {
  if (waypoints_.size() == 1 || t <= start_time()) return waypoints_.front().pos;
  if (t >= end_time()) return waypoints_.back().pos;
  const std::size_t k = segment(t);
  const auto& a = waypoints_[k];
  const auto& b = waypoints_[k + 1];
  const double s = (t - a.t) / (b.t - a.t);
  return a.pos + s * (b.pos - a.pos);
}

Vec2 Trajectory::base_velocity(double t) const {
  if (waypoints_.size() == 1 || t < start_time() || t >= end_time()) return {};
  const std::size_t k = segment(t);
  const auto& a = waypoints_[k];
  const auto& b = waypoints_[k + 1];
  return (1.0 / (b.t - a.t)) * (b.pos - a.pos);
}

Vec2 Trajectory::heading(double t) const {
  const Vec2 v = base_velocity(t);
  const double n = norm(v);
  return n > 0.0 ? (1.0 / n) * v : Vec2{};
}

Vec2 Trajectory::position(double t) const {
  if (waypoints_.empty()) throw Error(Errc::InvalidConfig, "empty trajectory");
  Vec2 p = base_position(t);
  if (swing_amp_ != 0.0) {
    p = p + swing_amp_ * std::sin(kTwoPi * swing_freq_ * t + swing_phase_) * heading(t);
  }
  return p;
}

Vec2 Trajectory::velocity(double t) const {
  if (waypoints_.empty()) throw Error(Errc::InvalidConfig, "empty trajectory");
  Vec2 v = base_velocity(t);
  if (swing_amp_ != 0.0) {
    const double w = kTwoPi * swing_freq_;
    v = v + swing_amp_ * w * std::cos(w * t + swing_phase_) * heading(t);
  }
  return v;
}

// --- Geometry ---------------------------------------------------------------

BistaticParams bistatic_truth(Vec2 pos, Vec2 vel, const SystemConfig& cfg) {
  const Vec2 tx = cfg.tx_position();
  const Vec2 to_tx = pos - tx;
  const double r_rx = norm(pos);
  const double r_tx = norm(to_tx);
  constexpr double kMinDistance = 1e-6;
  if (r_rx < kMinDistance || r_tx < kMinDistance) {
    throw Error(Errc::DegenerateGeometry, "scatterer coincides with the transmitter or receiver");
  }
  BistaticParams out;
  out.delay = (r_rx + r_tx) / kSpeedOfLight;
  out.aoa = std::atan2(pos.x, pos.y);
  const double path_rate = dot(vel, (1.0 / r_rx) * pos) + dot(vel, (1.0 / r_tx) * to_tx);
  out.doppler = -path_rate / cfg.wavelength();
  return out;
}

StaticPath direct_path(const SystemConfig& cfg, double amplitude) {
  return {amplitude, cfg.tx_delay(), cfg.tx_aoa};
}

// --- Synthesis --------------------------------------------------------------

CpiCube synth_cpi(const Scene& scene, const SystemConfig& cfg, double t0) {
  if (scene.static_paths.empty() && scene.scatterers.empty()) {
    throw Error(Errc::InvalidConfig, "scene has no paths");
  }
  const std::size_t nf = cfg.num_subcarriers();
  const std::size_t na = cfg.num_antennas;
  const std::size_t nt = cfg.cpi_len;
  const auto first = static_cast<std::uint64_t>(std::llround(t0 / cfg.sample_interval));
  const auto hw = hardware_phases(scene.impairments, na);

  struct Frozen {
    double amplitude;
    BistaticParams p;
  };
  std::vector<Frozen> frozen;
  for (const auto& s : scene.scatterers) {
    frozen.push_back({s.amplitude, checked_truth(s.trajectory.position(t0), s.trajectory.velocity(t0), cfg)});
  }

  CpiCube cube;
  cube.data = Tensor3<cplx>(nf, na, nt);
  cube.start_time = t0;
  cube.seq = first;
  std::vector<cplx> sample(nf * na);
  for (std::size_t k = 0; k < nt; ++k) {
    std::fill(sample.begin(), sample.end(), cplx{});
    for (const auto& sp : scene.static_paths) add_path(sample, cfg, sp.amplitude, sp.delay, sp.aoa);
    const double dt = static_cast<double>(k) * cfg.sample_interval;
    for (const auto& f : frozen) {
      // delay shrinks at rate f_D / f_c for a positive (closing) Doppler
      add_path(sample, cfg, f.amplitude, f.p.delay - f.p.doppler / cfg.carrier_freq * dt, f.p.aoa);
    }
    add_noise(sample, scene.impairments, first + k);
    apply_impairments(sample, scene.impairments, cfg, hw, first + k);
    for (std::size_t j = 0; j < nf; ++j) {
      for (std::size_t i = 0; i < na; ++i) cube.data(j, i, k) = sample[j * na + i];
    }
  }
  return cube;
}

CsiRecord synth_sample(const Scene& scene, const SystemConfig& cfg, std::uint64_t index) {
  if (scene.static_paths.empty() && scene.scatterers.empty()) {
    throw Error(Errc::InvalidConfig, "scene has no paths");
  }
  const std::size_t na = cfg.num_antennas;
  const double t = static_cast<double>(index) * cfg.sample_interval;
  std::vector<cplx> sample(cfg.num_subcarriers() * na);
  for (const auto& sp : scene.static_paths) add_path(sample, cfg, sp.amplitude, sp.delay, sp.aoa);
  for (const auto& s : scene.scatterers) {
    const auto p = checked_truth(s.trajectory.position(t), s.trajectory.velocity(t), cfg);
    add_path(sample, cfg, s.amplitude, p.delay, p.aoa);
  }
  add_noise(sample, scene.impairments, index);
  apply_impairments(sample, scene.impairments, cfg, hardware_phases(scene.impairments, na), index);

  CsiRecord rec;
  rec.timestamp = t;
  rec.payload.resize(sample.size());
  std::transform(sample.begin(), sample.end(), rec.payload.begin(),
                 [](cplx v) { return std::complex<float>(static_cast<float>(v.real()), static_cast<float>(v.imag())); });
  return rec;
}

std::vector<CsiRecord> synth_stream(const Scene& scene, const SystemConfig& cfg, std::uint64_t first,
                                    std::uint64_t count) {
  std::vector<CsiRecord> out;
  out.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) out.push_back(synth_sample(scene, cfg, first + n));
  return out;
}

// --- Scene files ------------------------------------------------------------

Scene parse_scene(const std::string& text, const SystemConfig& cfg) {
  const auto kv = KeyValueText::parse(text);
  Scene scene;
  std::vector<std::vector<Waypoint>> waypoints;
  struct Swing {
    double amp = 0.0, freq = 0.0, phase = 0.0;
  };
  std::vector<Swing> swings;
  std::vector<int> follows;  // scatterer whose waypoints are reused, or -1

  auto need = [](const KeyValueText::Entry& e, const std::vector<double>& v, std::size_t n) {
    if (v.size() != n) {
      throw Error(Errc::Parse, "line " + std::to_string(e.line) + ": '" + e.key + "' expects " + std::to_string(n) + " numbers");
    }
  };
  auto current = [&](const KeyValueText::Entry& e) -> std::size_t {
    if (scene.scatterers.empty()) {
      throw Error(Errc::Parse, "line " + std::to_string(e.line) + ": '" + e.key + "' before any scatterer");
    }
    return scene.scatterers.size() - 1;
  };

  for (const auto& e : kv.entries()) {
    if (e.key == "duration_s") {
      scene.duration = parse_double(e.value, e.key);
    } else if (e.key == "direct_path_amplitude") {
      scene.static_paths.push_back(direct_path(cfg, parse_double(e.value, e.key)));
    } else if (e.key == "static_path") {
      const auto v = parse_number_list(e.value, e.key);
      need(e, v, 3);
      scene.static_paths.push_back({v[0], v[1], deg_to_rad(v[2])});
    } else if (e.key == "scatterer") {
      scene.scatterers.push_back({parse_double(e.value, e.key), {}});
      waypoints.emplace_back();
      swings.emplace_back();
      follows.push_back(-1);
    } else if (e.key == "limb") {
      // amplitude, swing amplitude (m), swing frequency (Hz), phase (deg);
      // follows the most recent scatterer with waypoints
      const auto v = parse_number_list(e.value, e.key);
      need(e, v, 4);
      const auto base = static_cast<int>(current(e));
      scene.scatterers.push_back({v[0], {}});
      waypoints.emplace_back();
      swings.push_back({v[1], v[2], deg_to_rad(v[3])});
      follows.push_back(follows[static_cast<std::size_t>(base)] >= 0 ? follows[static_cast<std::size_t>(base)] : base);
    } else if (e.key == "waypoint") {
      const auto v = parse_number_list(e.value, e.key);
      need(e, v, 3);
      waypoints[current(e)].push_back({v[0], {v[1], v[2]}});
    } else if (e.key == "swing") {
      const auto v = parse_number_list(e.value, e.key);
      need(e, v, 3);
      swings[current(e)] = {v[0], v[1], deg_to_rad(v[2])};
    } else if (e.key == "noise_std") {
      scene.impairments.noise_std = parse_double(e.value, e.key);
    } else if (e.key == "to_jitter_s") {
      scene.impairments.to_jitter = parse_double(e.value, e.key);
    } else if (e.key == "cfo_hz") {
      scene.impairments.cfo = parse_double(e.value, e.key);
    } else if (e.key == "hw_phase_deg") {
      auto v = parse_number_list(e.value, e.key);
      for (auto& p : v) p = deg_to_rad(p);
      scene.impairments.hw_phase = std::move(v);
    } else if (e.key == "impairments") {
      scene.impairments.enabled = parse_bool(e.value, e.key);
    } else if (e.key == "seed") {
      scene.impairments.seed = static_cast<std::uint64_t>(parse_int(e.value, e.key));
    } else {
      throw Error(Errc::Parse, "line " + std::to_string(e.line) + ": unknown scene key '" + e.key + "'");
    }
  }

  for (std::size_t s = 0; s < scene.scatterers.size(); ++s) {
    const auto& wps = follows[s] >= 0 ? waypoints[static_cast<std::size_t>(follows[s])] : waypoints[s];
    if (wps.empty()) throw Error(Errc::Parse, "scatterer " + std::to_string(s) + " has no waypoints");
    Trajectory traj(wps);
    if (swings[s].amp != 0.0) traj = traj.with_swing(swings[s].amp, swings[s].freq, swings[s].phase);
    scene.scatterers[s].trajectory = std::move(traj);
  }
  if (scene.duration <= 0.0) {
    for (const auto& s : scene.scatterers) scene.duration = std::max(scene.duration, s.trajectory.end_time());
  }
  return scene;
}

Scene load_scene(const std::string& path, const SystemConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open scene file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), cfg);
}

}  // namespace powersense
