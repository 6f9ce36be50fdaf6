#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "powersense/core.hpp"
#include "powersense/error.hpp"
#include "powersense/keyvalue.hpp"

namespace powersense {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view what, const std::string& s) {
  throw Error(Errc::Parse, "bad value for " + std::string(what) + ": '" + s + "'");
}

}  // namespace

KeyValueText KeyValueText::parse(std::string_view text) {
  KeyValueText kv;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    Entry e{trim(std::string_view(stripped).substr(0, eq)), trim(std::string_view(stripped).substr(eq + 1)), line_no};
    if (e.key.empty()) throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": empty key");
    kv.entries_.push_back(std::move(e));
  }
  return kv;
}

KeyValueText KeyValueText::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> KeyValueText::get(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->key == key) return it->value;
  }
  return std::nullopt;
}

std::vector<const KeyValueText::Entry*> KeyValueText::get_all(std::string_view key) const {
  std::vector<const Entry*> out;
  for (const auto& e : entries_) {
    if (e.key == key) out.push_back(&e);
  }
  return out;
}

double parse_double(const std::string& s, std::string_view what) {
  // strtod handles exponents and inf/nan uniformly across libstdc++ versions
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) bad_value(what, s);
  return v;
}

long long parse_int(const std::string& s, std::string_view what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) bad_value(what, s);
  return v;
}

std::size_t parse_count(const std::string& s, std::string_view what) {
  const long long v = parse_int(s, what);
  if (v < 0) bad_value(what, s);
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& s, std::string_view what) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(what, s);
}

std::vector<double> parse_number_list(const std::string& s, std::string_view what) {
  std::string copy = s;
  for (char& c : copy) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(copy);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, what));
  return out;
}

namespace {

using Setter = std::function<void(SystemConfig&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"carrier_freq_hz", [](SystemConfig& c, const std::string& v) { c.carrier_freq = parse_double(v, "carrier_freq_hz"); }},
      {"num_antennas", [](SystemConfig& c, const std::string& v) { c.num_antennas = parse_count(v, "num_antennas"); }},
      {"antenna_spacing_m", [](SystemConfig& c, const std::string& v) { c.antenna_spacing = parse_double(v, "antenna_spacing_m"); }},
      {"sample_interval_s", [](SystemConfig& c, const std::string& v) { c.sample_interval = parse_double(v, "sample_interval_s"); }},
      {"cpi_len", [](SystemConfig& c, const std::string& v) { c.cpi_len = parse_count(v, "cpi_len"); }},
      {"fft_bins_delay", [](SystemConfig& c, const std::string& v) { c.fft_bins_delay = parse_count(v, "fft_bins_delay"); }},
      {"fft_bins_aoa", [](SystemConfig& c, const std::string& v) { c.fft_bins_aoa = parse_count(v, "fft_bins_aoa"); }},
      {"fft_bins_doppler", [](SystemConfig& c, const std::string& v) { c.fft_bins_doppler = parse_count(v, "fft_bins_doppler"); }},
      {"tx_range_m", [](SystemConfig& c, const std::string& v) { c.tx_range = parse_double(v, "tx_range_m"); }},
      {"tx_aoa_deg", [](SystemConfig& c, const std::string& v) { c.tx_aoa = deg_to_rad(parse_double(v, "tx_aoa_deg")); }},
      {"max_speed_mps", [](SystemConfig& c, const std::string& v) { c.max_speed = parse_double(v, "max_speed_mps"); }},
      {"snr_threshold_db", [](SystemConfig& c, const std::string& v) { c.snr_threshold_db = parse_double(v, "snr_threshold_db"); }},
      {"zscore_threshold", [](SystemConfig& c, const std::string& v) { c.zscore_threshold = parse_double(v, "zscore_threshold"); }},
      {"fusion_window_s", [](SystemConfig& c, const std::string& v) { c.fusion_window = parse_double(v, "fusion_window_s"); }},
      {"cpi_stride", [](SystemConfig& c, const std::string& v) { c.cpi_stride = parse_count(v, "cpi_stride"); }},
      {"md_window_len", [](SystemConfig& c, const std::string& v) { c.md_window_len = parse_count(v, "md_window_len"); }},
      {"md_fft_len", [](SystemConfig& c, const std::string& v) { c.md_fft_len = parse_count(v, "md_fft_len"); }},
      {"doppler_window", [](SystemConfig& c, const std::string& v) {
         if (v == "rect" || v == "rectangular") c.doppler_window = DopplerWindow::Rectangular;
         else if (v == "hann") c.doppler_window = DopplerWindow::Hann;
         else bad_value("doppler_window", v);
       }},
      {"refine_peak", [](SystemConfig& c, const std::string& v) { c.refine_peak = parse_bool(v, "refine_peak"); }},
      {"single_sided_delay", [](SystemConfig& c, const std::string& v) { c.single_sided_delay = parse_bool(v, "single_sided_delay"); }},
      {"max_missing_fraction", [](SystemConfig& c, const std::string& v) { c.max_missing_fraction = parse_double(v, "max_missing_fraction"); }},
      {"reorder_window", [](SystemConfig& c, const std::string& v) { c.reorder_window = parse_count(v, "reorder_window"); }},
      {"gate_distance_m", [](SystemConfig& c, const std::string& v) { c.tracker.gate_distance = parse_double(v, "gate_distance_m"); }},
      {"confirm_age", [](SystemConfig& c, const std::string& v) { c.tracker.confirm_age = static_cast<int>(parse_int(v, "confirm_age")); }},
      {"confirm_visibility", [](SystemConfig& c, const std::string& v) { c.tracker.confirm_visibility = parse_double(v, "confirm_visibility"); }},
      {"confirm_max_misses", [](SystemConfig& c, const std::string& v) { c.tracker.confirm_max_misses = static_cast<int>(parse_int(v, "confirm_max_misses")); }},
      {"delete_misses", [](SystemConfig& c, const std::string& v) { c.tracker.delete_misses = static_cast<int>(parse_int(v, "delete_misses")); }},
      {"init_accel_mps2", [](SystemConfig& c, const std::string& v) { c.tracker.init_accel = parse_double(v, "init_accel_mps2"); }},
      {"jerk_psd", [](SystemConfig& c, const std::string& v) { c.tracker.jerk_psd = parse_double(v, "jerk_psd"); }},
      {"meas_pos_std_m", [](SystemConfig& c, const std::string& v) { c.tracker.meas_pos_std = parse_double(v, "meas_pos_std_m"); }},
      {"meas_vel_std_mps", [](SystemConfig& c, const std::string& v) { c.tracker.meas_vel_std = parse_double(v, "meas_vel_std_mps"); }},
  };
  return table;
}

}  // namespace

SystemConfig parse_config(const std::string& text) {
  const auto kv = KeyValueText::parse(text);
  SystemConfig cfg = SystemConfig::defaults();
  bool spacing_given = false;

  std::optional<std::size_t> sc_count;
  std::optional<double> sc_spacing;
  std::optional<std::vector<double>> sc_list;

  for (const auto& e : kv.entries()) {
    if (e.key == "subcarrier_count") {
      sc_count = parse_count(e.value, e.key);
    } else if (e.key == "subcarrier_spacing_hz") {
      sc_spacing = parse_double(e.value, e.key);
    } else if (e.key == "subcarrier_freqs_hz") {
      sc_list = parse_number_list(e.value, e.key);
    } else if (auto it = setters().find(e.key); it != setters().end()) {
      it->second(cfg, e.value);
      if (e.key == "antenna_spacing_m") spacing_given = true;
    } else {
      throw Error(Errc::Parse, "line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
  }

  if (sc_list) {
    cfg.subcarrier_freqs = *sc_list;
  } else if (sc_count || sc_spacing) {
    cfg.subcarrier_freqs = SystemConfig::uniform_grid(cfg.carrier_freq, sc_count.value_or(100), sc_spacing.value_or(180e3));
  } else {
    cfg.subcarrier_freqs = SystemConfig::uniform_grid(cfg.carrier_freq, 100, 180e3);
  }
  if (!spacing_given) cfg.antenna_spacing = cfg.wavelength() / 2.0;
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const SystemConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "# powersense configuration\n";
  o << "carrier_freq_hz = " << c.carrier_freq << "\n";
  o << "subcarrier_freqs_hz =";
  for (double f : c.subcarrier_freqs) o << ' ' << f;
  o << "\n";
  o << "num_antennas = " << c.num_antennas << "\n";
  o << "antenna_spacing_m = " << c.antenna_spacing << "\n";
  o << "sample_interval_s = " << c.sample_interval << "\n";
  o << "cpi_len = " << c.cpi_len << "\n";
  o << "fft_bins_delay = " << c.fft_bins_delay << "\n";
  o << "fft_bins_aoa = " << c.fft_bins_aoa << "\n";
  o << "fft_bins_doppler = " << c.fft_bins_doppler << "\n";
  o << "tx_range_m = " << c.tx_range << "\n";
  o << "tx_aoa_deg = " << rad_to_deg(c.tx_aoa) << "\n";
  o << "max_speed_mps = " << c.max_speed << "\n";
  o << "snr_threshold_db = " << c.snr_threshold_db << "\n";
  o << "zscore_threshold = " << c.zscore_threshold << "\n";
  o << "fusion_window_s = " << c.fusion_window << "\n";
  o << "cpi_stride = " << c.cpi_stride << "\n";
  o << "md_window_len = " << c.md_window_len << "\n";
  o << "md_fft_len = " << c.md_fft_len << "\n";
  o << "doppler_window = " << (c.doppler_window == DopplerWindow::Hann ? "hann" : "rect") << "\n";
  o << "refine_peak = " << (c.refine_peak ? "true" : "false") << "\n";
  o << "single_sided_delay = " << (c.single_sided_delay ? "true" : "false") << "\n";
  o << "max_missing_fraction = " << c.max_missing_fraction << "\n";
  o << "reorder_window = " << c.reorder_window << "\n";
  o << "gate_distance_m = " << c.tracker.gate_distance << "\n";
  o << "confirm_age = " << c.tracker.confirm_age << "\n";
  o << "confirm_visibility = " << c.tracker.confirm_visibility << "\n";
  o << "confirm_max_misses = " << c.tracker.confirm_max_misses << "\n";
  o << "delete_misses = " << c.tracker.delete_misses << "\n";
  o << "init_accel_mps2 = " << c.tracker.init_accel << "\n";
  o << "jerk_psd = " << c.tracker.jerk_psd << "\n";
  o << "meas_pos_std_m = " << c.tracker.meas_pos_std << "\n";
  o << "meas_vel_std_mps = " << c.tracker.meas_vel_std << "\n";
  return o.str();
}

}  // namespace powersense
