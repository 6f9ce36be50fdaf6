#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "powersense/core.hpp"
#include "powersense/detection.hpp"

namespace powersense {

using StateVec = Eigen::Matrix<double, 6, 1>;
using StateCov = Eigen::Matrix<double, 6, 6>;
using MeasVec = Eigen::Vector3d;
using MeasJac = Eigen::Matrix<double, 3, 6>;

// State order: x, y, vx, vy, ax, ay.
struct Track {
  int id = 0;
  StateVec state = StateVec::Zero();
  StateCov cov = StateCov::Identity();
  int age = 0;
  int hits = 0;
  int consecutive_misses = 0;
  bool confirmed = false;
  bool associated = false;  // updated in the latest frame
  double last_update = 0.0;
  double last_nis = 0.0;

  Vec2 position() const { return {state(0), state(1)}; }
  Vec2 velocity() const { return {state(2), state(3)}; }
};

// Intersection of the delay ellipse with the AoA ray. `delay` is absolute.
// Throws Error(DegenerateGeometry) when the ray does not meet the ellipse.
Vec2 bistatic_to_cartesian(double delay, double aoa, const SystemConfig& cfg);
Vec2 bistatic_to_cartesian(const FusedMeasurement& m, const SystemConfig& cfg);

Track ekf_predict(Track tr, double dt, const TrackerParams& params);

// [x, y, bistatic closing speed]; the closing speed is lambda * f_D.
MeasVec measurement_model(const StateVec& s, const SystemConfig& cfg);
MeasJac measurement_jacobian(const StateVec& s, const SystemConfig& cfg);

// Throws Error(NumericalFailure) when the innovation covariance is singular.
Track ekf_update(Track tr, const MeasVec& z, const SystemConfig& cfg);
Track ekf_update(Track tr, const FusedMeasurement& m, const SystemConfig& cfg);

// Gated nearest-neighbour association with track birth, confirmation and
// deletion. One call per fusion frame, in time order.
class Tracker {
 public:
  struct Deletion {
    int id = 0;
    bool confirmed = false;
    double time = 0.0;
  };

  explicit Tracker(const SystemConfig& cfg) : cfg_(cfg) {}

  const std::vector<Track>& step(double time, const std::optional<FusedMeasurement>& m);

  const std::vector<Track>& tracks() const { return tracks_; }
  const std::vector<Deletion>& deletions() const { return deletions_; }
  std::uint64_t dropped_measurements() const { return dropped_; }
  std::uint64_t failed_updates() const { return failed_updates_; }

 private:
  Track spawn(double time, Vec2 pos, const FusedMeasurement& m);

  SystemConfig cfg_;
  std::vector<Track> tracks_;
  std::vector<Deletion> deletions_;
  int next_id_ = 1;
  std::optional<double> last_time_;
  std::uint64_t dropped_ = 0;
  std::uint64_t failed_updates_ = 0;
};

}  // namespace powersense
