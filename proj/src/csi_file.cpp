#include "powersense/csi_file.hpp"

#include <algorithm>
#include <cstring>

#include "bytes.hpp"
#include "powersense/error.hpp"

namespace powersense {

CsiFileHeader CsiFileHeader::from_config(const SystemConfig& cfg) {
  CsiFileHeader h;
  h.carrier_freq = cfg.carrier_freq;
  h.num_antennas = static_cast<std::uint8_t>(cfg.num_antennas);
  h.sample_rate = 1.0 / cfg.sample_interval;
  h.antenna_spacing = cfg.antenna_spacing;
  h.subcarrier_freqs = cfg.subcarrier_freqs;
  return h;
}

SystemConfig apply_header(SystemConfig cfg, const CsiFileHeader& h) {
  cfg.carrier_freq = h.carrier_freq;
  cfg.num_antennas = h.num_antennas;
  cfg.sample_interval = 1.0 / h.sample_rate;
  cfg.antenna_spacing = h.antenna_spacing;
  cfg.subcarrier_freqs = h.subcarrier_freqs;
  cfg.validate();
  return cfg;
}

CsiWriter::CsiWriter(const std::string& path, const CsiFileHeader& header) : header_(header) {
  if (header.num_subcarriers() == 0 || header.num_subcarriers() > 0xFFFF || header.num_antennas == 0) {
    throw Error(Errc::ShapeMismatch, "header shape out of range");
  }
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(Errc::Io, "cannot create " + path);
  std::vector<std::uint8_t> h(std::begin(kCsiMagic), std::end(kCsiMagic));
  bytes::put_u16(h, header.version);
  bytes::put_f64(h, header.carrier_freq);
  bytes::put_u16(h, static_cast<std::uint16_t>(header.num_subcarriers()));
  bytes::put_u8(h, header.num_antennas);
  bytes::put_f64(h, header.sample_rate);
  bytes::put_f64(h, header.antenna_spacing);
  for (double f : header.subcarrier_freqs) bytes::put_f64(h, f);
  out_.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
}

void CsiWriter::write(const CsiRecord& rec) {
  if (rec.payload.size() != header_.payload_len()) {
    throw Error(Errc::ShapeMismatch, "record has " + std::to_string(rec.payload.size()) + " entries, header expects " +
                                         std::to_string(header_.payload_len()));
  }
  if (last_time_ && rec.timestamp < *last_time_) throw Error(Errc::NonMonotoneTimestamp, "timestamp went backwards");
  last_time_ = rec.timestamp;
  buf_.clear();
  bytes::put_f64(buf_, rec.timestamp);
  for (const auto& v : rec.payload) {
    bytes::put_f32(buf_, v.real());
    bytes::put_f32(buf_, v.imag());
  }
  out_.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
  if (!out_) throw Error(Errc::Io, "write failed");
  ++count_;
}

void CsiWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(Errc::Io, "close failed");
}

CsiReader::CsiReader(const std::string& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(Errc::Io, "cannot open " + path);
  constexpr std::size_t fixed = 8 + 2 + 8 + 2 + 1 + 8 + 8;
  std::vector<std::uint8_t> h(fixed);
  in_.read(reinterpret_cast<char*>(h.data()), static_cast<std::streamsize>(fixed));
  if (in_.gcount() < 8 || !std::equal(std::begin(kCsiMagic), std::end(kCsiMagic), h.begin(),
                                      [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
    throw Error(Errc::BadMagic, path + " is not a CSI file");
  }
  if (static_cast<std::size_t>(in_.gcount()) < fixed) throw TruncatedRecordError(0, "header truncated");
  bytes::Cursor c({h.data() + 8, fixed - 8});
  header_.version = c.u16();
  if (header_.version != kCsiVersion) {
    throw Error(Errc::VersionMismatch, "file version " + std::to_string(header_.version) + ", expected " +
                                           std::to_string(kCsiVersion));
  }
  header_.carrier_freq = c.f64();
  const std::size_t nsub = c.u16();
  header_.num_antennas = c.u8();
  header_.sample_rate = c.f64();
  header_.antenna_spacing = c.f64();
  std::vector<std::uint8_t> f(8 * nsub);
  in_.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size()));
  if (static_cast<std::size_t>(in_.gcount()) < f.size()) throw TruncatedRecordError(0, "header truncated");
  bytes::Cursor fc(f);
  for (std::size_t j = 0; j < nsub; ++j) header_.subcarrier_freqs.push_back(fc.f64());
  buf_.resize(header_.record_bytes());
}

std::optional<CsiRecord> CsiReader::next() {
  in_.read(reinterpret_cast<char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) return std::nullopt;
  if (got < buf_.size()) {
    throw TruncatedRecordError(count_, "file ends inside record " + std::to_string(count_) + " (" +
                                           std::to_string(count_) + " complete records)");
  }
  bytes::Cursor c(buf_);
  CsiRecord rec;
  rec.timestamp = c.f64();
  rec.payload.resize(header_.payload_len());
  for (auto& v : rec.payload) {
    const float re = c.f32();
    const float im = c.f32();
    v = {re, im};
  }
  if (last_time_ && rec.timestamp < *last_time_) {
    throw Error(Errc::NonMonotoneTimestamp, "timestamp went backwards at record " + std::to_string(count_));
  }
  last_time_ = rec.timestamp;
  ++count_;
  return rec;
}

void write_csi(const std::string& path, const CsiFileHeader& header, const std::vector<CsiRecord>& records) {
  CsiWriter w(path, header);
  for (const auto& r : records) w.write(r);
  w.close();
}

std::vector<CsiRecord> read_csi(const std::string& path, CsiFileHeader* header) {
  CsiReader r(path);
  if (header != nullptr) *header = r.header();
  std::vector<CsiRecord> out;
  while (auto rec = r.next()) out.push_back(std::move(*rec));
  return out;
}

}  // namespace powersense
