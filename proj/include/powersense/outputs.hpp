#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "powersense/core.hpp"
#include "powersense/detection.hpp"
#include "powersense/microdoppler.hpp"
#include "powersense/tracking.hpp"

namespace powersense {

// time, track_id, confirmed, x, y, vx, vy, ax, ay, assoc_flag
class TrackCsvWriter {
 public:
  explicit TrackCsvWriter(const std::string& path);
  void write(double time, const std::vector<Track>& tracks);
  void close();

 private:
  std::ofstream out_;
};

// time, delay_s, aoa_deg, doppler_hz, snr_db, n_used, x, y
class FusedCsvWriter {
 public:
  explicit FusedCsvWriter(const std::string& path);
  // `pos` is empty when the measurement could not be placed.
  void write(const FusedMeasurement& m, const std::optional<Vec2>& pos);
  void close();

 private:
  std::ofstream out_;
};

// Float32 little-endian matrix (windows x bins, row-major) plus a text sidecar
// `<path>.txt` describing the axes.
void write_spectrogram_bin(const std::string& path, const Spectrogram& s);
// 8-bit binary graymap, Doppler on the vertical axis (positive at the top).
void write_spectrogram_pgm(const std::string& path, const Spectrogram& s);

// Appends feature tensors to one file: "PSTENSOR", u16 version, then per
// tensor: f64 time, three u32 dims, the delay/AoA/Doppler axes as f64, and
// the complex64 data in delay x AoA x Doppler row-major order.
class TensorDumper {
 public:
  explicit TensorDumper(const std::string& path);
  void write(const FeatureTensor& t);
  void close();

 private:
  std::ofstream out_;
};

// Formats with a fixed number of significant digits, independent of locale.
std::string format_number(double v);

}  // namespace powersense
