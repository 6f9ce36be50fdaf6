#include "powersense/outputs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "bytes.hpp"
#include "powersense/error.hpp"

namespace powersense {

namespace {

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot create " + path);
  return out;
}

void finish(std::ofstream& out) {
  if (!out.is_open()) return;
  out.close();
  if (out.fail()) throw Error(Errc::Io, "write failed");
}

void write_bytes(std::ofstream& out, const std::vector<std::uint8_t>& b) {
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

TrackCsvWriter::TrackCsvWriter(const std::string& path) : out_(open_out(path, false)) {
  out_ << "time,track_id,confirmed,x,y,vx,vy,ax,ay,assoc_flag\n";
}

void TrackCsvWriter::write(double time, const std::vector<Track>& tracks) {
  for (const auto& t : tracks) {
    out_ << format_number(time) << ',' << t.id << ',' << (t.confirmed ? 1 : 0);
    for (int n = 0; n < 6; ++n) out_ << ',' << format_number(t.state(n));
    out_ << ',' << (t.associated ? 1 : 0) << '\n';
  }
}

void TrackCsvWriter::close() { finish(out_); }

FusedCsvWriter::FusedCsvWriter(const std::string& path) : out_(open_out(path, false)) {
  out_ << "time,delay_s,aoa_deg,doppler_hz,snr_db,n_used,x,y\n";
}

void FusedCsvWriter::write(const FusedMeasurement& m, const std::optional<Vec2>& pos) {
  out_ << format_number(m.window_end_time) << ',' << format_number(m.delay) << ',' << format_number(rad_to_deg(m.aoa))
       << ',' << format_number(m.doppler) << ',' << format_number(m.snr) << ',' << m.n_used << ',';
  if (pos) {
    out_ << format_number(pos->x) << ',' << format_number(pos->y);
  } else {
    out_ << ',';
  }
  out_ << '\n';
}

void FusedCsvWriter::close() { finish(out_); }

void write_spectrogram_bin(const std::string& path, const Spectrogram& s) {
  auto out = open_out(path, true);
  std::vector<std::uint8_t> b;
  b.reserve(4 * s.matrix.size());
  for (double v : s.matrix) bytes::put_f32(b, static_cast<float>(v));
  write_bytes(out, b);
  finish(out);

  auto side = open_out(path + ".txt", false);
  side << "format = float32 little-endian, row-major windows x bins\n";
  side << "windows = " << s.windows << '\n';
  side << "bins = " << s.bins << '\n';
  if (!s.time_axis.empty()) {
    side << "time_first_s = " << format_number(s.time_axis.front()) << '\n';
    side << "time_last_s = " << format_number(s.time_axis.back()) << '\n';
  }
  if (!s.doppler_axis.empty()) {
    side << "doppler_first_hz = " << format_number(s.doppler_axis.front()) << '\n';
    side << "doppler_last_hz = " << format_number(s.doppler_axis.back()) << '\n';
  }
  finish(side);
}

void write_spectrogram_pgm(const std::string& path, const Spectrogram& s) {
  auto out = open_out(path, true);
  out << "P5\n" << s.windows << ' ' << s.bins << "\n255\n";
  std::vector<std::uint8_t> px(s.windows * s.bins);
  for (std::size_t b = 0; b < s.bins; ++b) {
    const std::size_t row = s.bins - 1 - b;
    for (std::size_t w = 0; w < s.windows; ++w) {
      px[row * s.windows + w] = static_cast<std::uint8_t>(std::lround(std::clamp(s.at(w, b), 0.0, 1.0) * 255.0));
    }
  }
  write_bytes(out, px);
  finish(out);
}

TensorDumper::TensorDumper(const std::string& path) : out_(open_out(path, true)) {
  std::vector<std::uint8_t> h{'P', 'S', 'T', 'E', 'N', 'S', 'O', 'R'};
  bytes::put_u16(h, 1);
  write_bytes(out_, h);
}

void TensorDumper::write(const FeatureTensor& t) {
  std::vector<std::uint8_t> b;
  bytes::put_f64(b, t.time);
  for (std::size_t a = 0; a < 3; ++a) bytes::put_u32(b, static_cast<std::uint32_t>(t.data.dim(a)));
  for (double v : t.delay_axis) bytes::put_f64(b, v);
  for (double v : t.aoa_axis) bytes::put_f64(b, v);
  for (double v : t.doppler_axis) bytes::put_f64(b, v);
  for (const auto& v : t.data.flat()) {
    bytes::put_f32(b, static_cast<float>(v.real()));
    bytes::put_f32(b, static_cast<float>(v.imag()));
  }
  write_bytes(out_, b);
}

void TensorDumper::close() { finish(out_); }

}  // namespace powersense
