#pragma once

#include <cstdint>
#include <string>

#include "powersense/core.hpp"
#include "powersense/simulator.hpp"

namespace powersense {

// Walk with two swinging limbs used when no scene file is given.
std::string default_scene_text();

struct SimulateSummary {
  std::size_t records = 0;
  std::string csi_path;
  std::string truth_path;
};

// Writes <out>/csi.bin and <out>/truth.csv (first scatterer's ground truth).
SimulateSummary run_simulate(const Scene& scene, const SystemConfig& cfg, const std::string& out_dir);

struct TrackOptions {
  std::string input;          // CSI file; empty selects UDP
  std::string udp_bind;       // host:port
  double udp_first_timeout = 10.0;  // s to wait for the first datagram
  double udp_idle_timeout = 1.0;    // s of silence that ends the stream
  bool debug_tensors = false;
};

struct TrackSummary {
  std::size_t records = 0;
  std::size_t cpis = 0;
  std::size_t skipped_cpis = 0;
  std::size_t detections = 0;
  std::size_t fused = 0;
  std::size_t confirmed_tracks = 0;
  std::size_t deletions = 0;
  std::uint64_t gaps = 0;
};

// Writes <out>/tracks.csv, <out>/fused.csv and, when requested,
// <out>/tensors.bin. Radio parameters come from the file header in file mode.
TrackSummary run_track(const SystemConfig& cfg, const TrackOptions& opt, const std::string& out_dir);

enum class SpectrogramFormat { Binary, Graymap, Both };

struct MicroDopplerSummary {
  std::size_t cpis = 0;
  std::size_t valid = 0;
  std::size_t windows = 0;
};

// Writes <out>/spectrogram.f32 (+ .txt) and/or <out>/spectrogram.pgm.
MicroDopplerSummary run_microdoppler(const SystemConfig& cfg, const std::string& input, const std::string& out_dir,
                                     SpectrogramFormat format);

}  // namespace powersense
