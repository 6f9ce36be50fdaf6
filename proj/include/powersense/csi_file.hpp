#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "powersense/core.hpp"

namespace powersense {

inline constexpr char kCsiMagic[8] = {'P', 'W', 'R', 'S', 'E', 'N', 'S', 'E'};
inline constexpr std::uint16_t kCsiVersion = 1;

struct CsiFileHeader {
  std::uint16_t version = kCsiVersion;
  double carrier_freq = 0.0;   // Hz
  std::uint8_t num_antennas = 0;
  double sample_rate = 0.0;    // Hz
  double antenna_spacing = 0.0;
  std::vector<double> subcarrier_freqs;

  static CsiFileHeader from_config(const SystemConfig& cfg);
  std::size_t num_subcarriers() const { return subcarrier_freqs.size(); }
  std::size_t payload_len() const { return num_subcarriers() * num_antennas; }
  // Record size on disk in bytes.
  std::size_t record_bytes() const { return 8 + 8 * payload_len(); }
};

// Replaces the radio fields of `cfg` with those of the file and validates.
SystemConfig apply_header(SystemConfig cfg, const CsiFileHeader& h);

class CsiWriter {
 public:
  CsiWriter(const std::string& path, const CsiFileHeader& header);

  // Throws Error(ShapeMismatch) or Error(NonMonotoneTimestamp).
  void write(const CsiRecord& rec);
  void close();
  std::size_t count() const { return count_; }

 private:
  std::ofstream out_;
  CsiFileHeader header_;
  std::optional<double> last_time_;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> buf_;
};

class CsiReader {
 public:
  // Throws Error(Io), Error(BadMagic) or Error(VersionMismatch).
  explicit CsiReader(const std::string& path);

  const CsiFileHeader& header() const { return header_; }
  // Next record, or nullopt at a clean end of file. Throws
  // TruncatedRecordError or Error(NonMonotoneTimestamp).
  std::optional<CsiRecord> next();
  std::size_t count() const { return count_; }

 private:
  std::ifstream in_;
  CsiFileHeader header_;
  std::optional<double> last_time_;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> buf_;
};

void write_csi(const std::string& path, const CsiFileHeader& header, const std::vector<CsiRecord>& records);
std::vector<CsiRecord> read_csi(const std::string& path, CsiFileHeader* header = nullptr);

}  // namespace powersense
