#include "powersense/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "powersense/error.hpp"

namespace powersense {

namespace {

Eigen::Vector2d as_eigen(Vec2 v) { return {v.x, v.y}; }

Eigen::Matrix3d measurement_noise(const TrackerParams& p) {
  return Eigen::Vector3d(p.meas_pos_std * p.meas_pos_std, p.meas_pos_std * p.meas_pos_std,
                         p.meas_vel_std * p.meas_vel_std)
      .asDiagonal();
}

}  // namespace

Vec2 bistatic_to_cartesian(double delay, double aoa, const SystemConfig& cfg) {
  const double dx = delay * kSpeedOfLight;
  const double ds = cfg.tx_range;
  const double denom = 2.0 * (dx - ds * std::cos(aoa - cfg.tx_aoa));
  if (!(dx > ds) || !(denom > 0.0)) {
    throw Error(Errc::DegenerateGeometry, "measurement path does not exceed the baseline");
  }
  const double r = (dx * dx - ds * ds) / denom;
  return {r * std::sin(aoa), r * std::cos(aoa)};
}

Vec2 bistatic_to_cartesian(const FusedMeasurement& m, const SystemConfig& cfg) {
  return bistatic_to_cartesian(m.delay, m.aoa, cfg);
}

Track ekf_predict(Track tr, double dt, const TrackerParams& params) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidConfig, "prediction step must be positive");
  StateCov f = StateCov::Identity();
  StateCov q = StateCov::Zero();
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt, dt5 = dt4 * dt;
  const double qb[3][3] = {{dt5 / 20.0, dt4 / 8.0, dt3 / 6.0}, {dt4 / 8.0, dt3 / 3.0, dt2 / 2.0}, {dt3 / 6.0, dt2 / 2.0, dt}};
  for (int axis = 0; axis < 2; ++axis) {
    f(axis, 2 + axis) = dt;
    f(axis, 4 + axis) = 0.5 * dt2;
    f(2 + axis, 4 + axis) = dt;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) q(2 * r + axis, 2 * c + axis) = params.jerk_psd * qb[r][c];
    }
  }
  tr.state = f * tr.state;
  tr.cov = f * tr.cov * f.transpose() + q;
  tr.cov = 0.5 * (tr.cov + tr.cov.transpose());
  return tr;
}

MeasVec measurement_model(const StateVec& s, const SystemConfig& cfg) {
  const Eigen::Vector2d p = s.segment<2>(0);
  const Eigen::Vector2d v = s.segment<2>(2);
  const Eigen::Vector2d to_tx = p - as_eigen(cfg.tx_position());
  const double r_t = to_tx.norm();
  const double r_r = p.norm();
  if (r_t == 0.0 || r_r == 0.0) throw Error(Errc::DegenerateGeometry, "state coincides with Tx or Rx");
  const double rate = v.dot(to_tx / r_t) + v.dot(p / r_r);
  return {p(0), p(1), -rate};
}

MeasJac measurement_jacobian(const StateVec& s, const SystemConfig& cfg) {
  const Eigen::Vector2d p = s.segment<2>(0);
  const Eigen::Vector2d v = s.segment<2>(2);
  const Eigen::Vector2d to_tx = p - as_eigen(cfg.tx_position());
  const double r_t = to_tx.norm();
  const double r_r = p.norm();
  if (r_t == 0.0 || r_r == 0.0) throw Error(Errc::DegenerateGeometry, "state coincides with Tx or Rx");
  const Eigen::Vector2d u_t = to_tx / r_t;
  const Eigen::Vector2d u_r = p / r_r;
  const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();
  const Eigen::Vector2d d_pos =
      -((eye - u_t * u_t.transpose()) * v / r_t + (eye - u_r * u_r.transpose()) * v / r_r);
  const Eigen::Vector2d d_vel = -(u_t + u_r);
  MeasJac h = MeasJac::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  h(2, 0) = d_pos(0);
  h(2, 1) = d_pos(1);
  h(2, 2) = d_vel(0);
  h(2, 3) = d_vel(1);
  return h;
}

Track ekf_update(Track tr, const MeasVec& z, const SystemConfig& cfg) {
  const MeasJac h = measurement_jacobian(tr.state, cfg);
  const MeasVec innov = z - measurement_model(tr.state, cfg);
  const Eigen::Matrix3d s = h * tr.cov * h.transpose() + measurement_noise(cfg.tracker);
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-300) {
    throw Error(Errc::NumericalFailure, "singular innovation covariance");
  }
  const Eigen::Matrix<double, 6, 3> k = (ldlt.solve(h * tr.cov)).transpose();
  tr.state += k * innov;
  // Joseph form keeps the covariance positive definite
  const StateCov ikh = StateCov::Identity() - k * h;
  tr.cov = ikh * tr.cov * ikh.transpose() + k * measurement_noise(cfg.tracker) * k.transpose();
  tr.cov = 0.5 * (tr.cov + tr.cov.transpose());
  tr.last_nis = innov.dot(ldlt.solve(innov));
  return tr;
}

Track ekf_update(Track tr, const FusedMeasurement& m, const SystemConfig& cfg) {
  const Vec2 p = bistatic_to_cartesian(m, cfg);
  return ekf_update(std::move(tr), MeasVec(p.x, p.y, doppler_to_velocity(m.doppler, cfg)), cfg);
}

Track Tracker::spawn(double time, Vec2 pos, const FusedMeasurement& m) {
  const auto& p = cfg_.tracker;
  Track tr;
  tr.id = next_id_++;
  const double r = norm(pos);
  const double closing = doppler_to_velocity(m.doppler, cfg_);
  // half the Doppler speed, moving toward the receiver when closing
  const Vec2 v = r > 0.0 ? (-0.5 * closing / r) * pos : Vec2{};
  tr.state << pos.x, pos.y, v.x, v.y, p.init_accel, p.init_accel;
  tr.cov = StateCov::Zero();
  const double var[3] = {p.init_pos_std * p.init_pos_std, p.init_vel_std * p.init_vel_std,
                         p.init_accel_std * p.init_accel_std};
  for (int n = 0; n < 6; ++n) tr.cov(n, n) = var[n / 2];
  tr.age = 1;
  tr.hits = 1;
  tr.associated = true;
  tr.last_update = time;
  return tr;
}

const std::vector<Track>& Tracker::step(double time, const std::optional<FusedMeasurement>& m) {
  const auto& p = cfg_.tracker;
  const double dt = last_time_ ? time - *last_time_ : 0.0;
  last_time_ = time;
  for (auto& tr : tracks_) {
    if (dt > 0.0) tr = ekf_predict(std::move(tr), dt, p);
    ++tr.age;
    tr.associated = false;
  }

  std::optional<Vec2> pos;
  if (m) {
    try {
      pos = bistatic_to_cartesian(*m, cfg_);
    } catch (const Error&) {
      ++dropped_;
    }
  }

  if (pos) {
    Track* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (auto& tr : tracks_) {
      const double d = norm(tr.position() - *pos);
      if (d <= p.gate_distance && d < best_dist) {
        best = &tr;
        best_dist = d;
      }
    }
    if (best != nullptr) {
      try {
        *best = ekf_update(*best, MeasVec(pos->x, pos->y, doppler_to_velocity(m->doppler, cfg_)), cfg_);
        best->associated = true;
        best->last_update = time;
      } catch (const Error&) {
        ++failed_updates_;
      }
    } else {
      tracks_.push_back(spawn(time, *pos, *m));
    }
  }

  std::vector<Track> alive;
  for (auto& tr : tracks_) {
    if (tr.associated && tr.age > 1) {
      ++tr.hits;
      tr.consecutive_misses = 0;
    } else if (!tr.associated) {
      ++tr.consecutive_misses;
    }
    bool keep = tr.consecutive_misses < p.delete_misses;
    if (!tr.confirmed && tr.age > p.confirm_age) {
      const double visibility = static_cast<double>(tr.hits) / static_cast<double>(tr.age);
      if (visibility > p.confirm_visibility && tr.consecutive_misses < p.confirm_max_misses) {
        tr.confirmed = true;
      } else {
        keep = false;
      }
    }
    if (keep) {
      alive.push_back(std::move(tr));
    } else {
      deletions_.push_back({tr.id, tr.confirmed, time});
    }
  }
  tracks_ = std::move(alive);
  return tracks_;
}

}  // namespace powersense
