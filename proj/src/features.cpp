#include "powersense/features.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <tuple>

#include "powersense/error.hpp"

namespace powersense {

namespace {

constexpr int kBrentBits = 40;
constexpr int kScanSteps = 20;

// Grid scan of [lo, hi] followed by Brent on the best cell, so sidelobes at
// the bracket edges cannot capture the search.
template <typename F>
double scan_minimize(F f, double lo, double hi) {
  const double step = (hi - lo) / kScanSteps;
  int best = 0;
  double best_val = f(lo);
  for (int n = 1; n <= kScanSteps; ++n) {
    const double v = f(lo + n * step);
    if (v < best_val) {
      best_val = v;
      best = n;
    }
  }
  const double a = std::max(lo, lo + (best - 1) * step);
  const double b = std::min(hi, lo + (best + 1) * step);
  return boost::math::tools::brent_find_minima(f, a, b, kBrentBits).first;
}

std::vector<double> time_window(const SystemConfig& cfg) {
  std::vector<double> w(cfg.cpi_len, 1.0);
  if (cfg.doppler_window == DopplerWindow::Hann) {
    const double n = static_cast<double>(cfg.cpi_len - 1);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / n);
  }
  return w;
}

std::vector<cplx> tx_steering(const SystemConfig& cfg) {
  std::vector<cplx> s(cfg.num_antennas);
  const double u = cfg.antenna_spacing * std::sin(cfg.tx_aoa) / cfg.wavelength();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::polar(1.0, kTwoPi * static_cast<double>(i) * u);
  return s;
}

// Spatial frequency (cycles per element) of a shifted AoA bin.
double aoa_cycles(int shifted_bin, std::size_t n) {
  return static_cast<double>(shifted_bin - static_cast<int>(n / 2)) / static_cast<double>(n);
}

// exp(-j 2 pi i q) for every retained AoA bin and antenna.
std::vector<cplx> aoa_kernel(const AxisLayout& axes, const SystemConfig& cfg) {
  std::vector<cplx> k(axes.aoa_bins.size() * cfg.num_antennas);
  for (std::size_t a = 0; a < axes.aoa_bins.size(); ++a) {
    const double q = aoa_cycles(axes.aoa_bins[a], cfg.fft_bins_aoa);
    for (std::size_t i = 0; i < cfg.num_antennas; ++i) {
      k[a * cfg.num_antennas + i] = std::polar(1.0, -kTwoPi * static_cast<double>(i) * q);
    }
  }
  return k;
}

std::vector<std::size_t> doppler_sources(const AxisLayout& axes, std::size_t nd) {
  std::vector<std::size_t> src;
  for (int b : axes.doppler_bins) {
    src.push_back(static_cast<std::size_t>((b % static_cast<int>(nd) + static_cast<int>(nd)) % static_cast<int>(nd)));
  }
  return src;
}

// Inverse-kernel delay bin m from a forward real-input FFT row.
cplx inverse_bin(std::span<const cplx> forward, int m) {
  return m >= 0 ? std::conj(forward[static_cast<std::size_t>(m)]) : forward[static_cast<std::size_t>(-m)];
}

void fill_axes(FeatureTensor& t, const AxisLayout& axes) {
  t.delay_axis = axes.delay_axis;
  t.aoa_axis = axes.aoa_axis;
  t.doppler_axis = axes.doppler_axis;
  t.delay_bins = axes.delay_bins;
  t.aoa_bins = axes.aoa_bins;
  t.doppler_bins = axes.doppler_bins;
}

double cpi_centre(double start_time, const SystemConfig& cfg) {
  return start_time + 0.5 * static_cast<double>(cfg.cpi_len - 1) * cfg.sample_interval;
}

}  // namespace

PowerCube compute_csi_power(const CpiCube& cube) {
  PowerCube p;
  p.start_time = cube.start_time;
  p.data = Tensor3<double>(cube.data.dim(0), cube.data.dim(1), cube.data.dim(2));
  auto src = cube.data.flat();
  auto dst = p.data.flat();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = std::norm(src[n]);
  return p;
}

PowerCube regrid_uniform(const PowerCube& p, const SystemConfig& cfg) {
  if (p.data.dim(0) != cfg.num_subcarriers()) throw Error(Errc::ShapeMismatch, "power cube subcarrier count mismatch");
  if (cfg.subcarriers_uniform()) return p;
  const auto& f = cfg.subcarrier_freqs;
  const double df = cfg.effective_subcarrier_spacing();
  const std::size_t nf = f.size();
  PowerCube out;
  out.start_time = p.start_time;
  out.data = Tensor3<double>(nf, p.data.dim(1), p.data.dim(2));
  std::size_t seg = 0;
  for (std::size_t q = 0; q < nf; ++q) {
    const double fq = q + 1 == nf ? f.back() : f.front() + static_cast<double>(q) * df;
    while (seg + 2 < nf && f[seg + 1] < fq) ++seg;
    const double s = std::clamp((fq - f[seg]) / (f[seg + 1] - f[seg]), 0.0, 1.0);
    for (std::size_t i = 0; i < p.data.dim(1); ++i) {
      auto a = p.data.row(seg, i);
      auto b = p.data.row(seg + 1, i);
      auto o = out.data.row(q, i);
      for (std::size_t k = 0; k < o.size(); ++k) o[k] = (1.0 - s) * a[k] + s * b[k];
    }
  }
  return out;
}

Tensor3<cplx> delay_transform(const PowerCube& p, const SystemConfig& cfg) {
  const PowerCube u = regrid_uniform(p, cfg);
  const AxisLayout axes = make_axes(cfg);
  const std::size_t nf = u.data.dim(0);
  const std::size_t na = u.data.dim(1);
  const std::size_t nt = u.data.dim(2);
  RealBatchFft fft(cfg.fft_bins_delay, na * nt);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t k = 0; k < nt; ++k) {
      auto row = fft.input_row(i * nt + k);
      for (std::size_t j = 0; j < nf; ++j) row[j] = u.data(j, i, k);
    }
  }
  fft.execute();
  Tensor3<cplx> out(axes.delay_bins.size(), na, nt);
  for (std::size_t d = 0; d < axes.delay_bins.size(); ++d) {
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t k = 0; k < nt; ++k) out(d, i, k) = inverse_bin(fft.output_row(i * nt + k), axes.delay_bins[d]);
    }
  }
  return out;
}

Tensor3<cplx> remove_static_clutter(Tensor3<cplx> x) {
  for (std::size_t d = 0; d < x.dim(0); ++d) {
    for (std::size_t i = 0; i < x.dim(1); ++i) {
      auto row = x.row(d, i);
      cplx mean{};
      for (const auto& v : row) mean += v;
      mean /= static_cast<double>(row.size());
      for (auto& v : row) v -= mean;
    }
  }
  return x;
}

Tensor3<cplx> compensate_tx_angle(Tensor3<cplx> x, const SystemConfig& cfg) {
  if (x.dim(1) != cfg.num_antennas) throw Error(Errc::ShapeMismatch, "antenna count mismatch");
  const auto steer = tx_steering(cfg);
  for (std::size_t d = 0; d < x.dim(0); ++d) {
    for (std::size_t i = 0; i < x.dim(1); ++i) {
      for (auto& v : x.row(d, i)) v *= steer[i];
    }
  }
  return x;
}

FeatureTensor aoa_doppler_spectrum(const Tensor3<cplx>& x, const SystemConfig& cfg, double start_time) {
  const AxisLayout axes = make_axes(cfg);
  const std::size_t nd = x.dim(0);
  const std::size_t na = x.dim(1);
  const std::size_t nt = x.dim(2);
  if (nd != axes.delay_bins.size() || na != cfg.num_antennas || nt != cfg.cpi_len) {
    throw Error(Errc::ShapeMismatch, "delay cube shape does not match the configuration");
  }
  const auto w = time_window(cfg);
  BatchFft fft(cfg.fft_bins_doppler, nd * na, BatchFft::Direction::Forward);
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t i = 0; i < na; ++i) {
      auto row = fft.input_row(d * na + i);
      auto src = x.row(d, i);
      for (std::size_t k = 0; k < nt; ++k) row[k] = w[k] * src[k];
    }
  }
  fft.execute();

  const auto kernel = aoa_kernel(axes, cfg);
  const auto dsrc = doppler_sources(axes, cfg.fft_bins_doppler);
  FeatureTensor t;
  fill_axes(t, axes);
  t.start_time = start_time;
  t.time = cpi_centre(start_time, cfg);
  t.data = Tensor3<cplx>(nd, axes.aoa_bins.size(), dsrc.size());
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t a = 0; a < axes.aoa_bins.size(); ++a) {
      for (std::size_t b = 0; b < dsrc.size(); ++b) {
        cplx acc{};
        for (std::size_t i = 0; i < na; ++i) acc += kernel[a * na + i] * fft.output_row(d * na + i)[dsrc[b]];
        t.data(d, a, b) = acc;
      }
    }
  }
  return t;
}

Peak find_global_peak(const FeatureTensor& t) {
  if (t.data.empty()) throw Error(Errc::EmptyTensor, "feature tensor has no bins");
  if (t.delay_axis.size() != t.data.dim(0) || t.aoa_axis.size() != t.data.dim(1) ||
      t.doppler_axis.size() != t.data.dim(2) || t.doppler_bins.size() != t.data.dim(2)) {
    throw Error(Errc::ShapeMismatch, "feature tensor axes do not match its shape");
  }
  // lexicographic minimum of (-|Y|^2, delay index, |Doppler bin|, AoA index)
  auto key = [&](std::size_t d, std::size_t a, std::size_t b) {
    return std::make_tuple(-std::norm(t.data(d, a, b)), d, std::abs(t.doppler_bins[b]), a);
  };
  std::size_t bd = 0, ba = 0, bb = 0;
  auto best = key(0, 0, 0);
  for (std::size_t d = 0; d < t.data.dim(0); ++d) {
    for (std::size_t a = 0; a < t.data.dim(1); ++a) {
      for (std::size_t b = 0; b < t.data.dim(2); ++b) {
        const auto k = key(d, a, b);
        if (k < best) {
          best = k;
          bd = d;
          ba = a;
          bb = b;
        }
      }
    }
  }
  Peak p;
  p.delay_idx = bd;
  p.aoa_idx = ba;
  p.doppler_idx = bb;
  p.delay = t.delay_axis[bd];
  p.aoa = t.aoa_axis[ba];
  p.doppler = t.doppler_axis[bb];
  p.magnitude = std::abs(t.data(bd, ba, bb));
  return p;
}

FeatureTensor extract_features(const CpiCube& cube, const SystemConfig& cfg) {
  FeatureExtractor fx(cfg);
  return fx.run(cube);
}

std::vector<double> doppler_profile(const FeatureTensor& t) {
  std::vector<double> out(t.data.dim(2), 0.0);
  for (std::size_t d = 0; d < t.data.dim(0); ++d) {
    for (std::size_t a = 0; a < t.data.dim(1); ++a) {
      auto row = t.data.row(d, a);
      for (std::size_t b = 0; b < row.size(); ++b) out[b] += std::norm(row[b]);
    }
  }
  return out;
}

// --- FeatureExtractor -------------------------------------------------------

FeatureExtractor::FeatureExtractor(const SystemConfig& cfg)
    : cfg_(cfg),
      axes_(make_axes(cfg)),
      regrid_(!cfg.subcarriers_uniform()),
      window_(time_window(cfg)),
      steer_(tx_steering(cfg)),
      aoa_kernel_(aoa_kernel(axes_, cfg)),
      doppler_src_(doppler_sources(axes_, cfg.fft_bins_doppler)),
      power_(cfg.num_subcarriers(), cfg.num_antennas, cfg.cpi_len),
      delay_fft_(cfg.fft_bins_delay, cfg.num_antennas * cfg.cpi_len),
      doppler_fft_(cfg.fft_bins_doppler, axes_.delay_bins.size() * cfg.num_antennas, BatchFft::Direction::Forward) {
  cfg_.validate();
  fill_axes(tensor_, axes_);
  tensor_.data = Tensor3<cplx>(axes_.delay_bins.size(), axes_.aoa_bins.size(), doppler_src_.size());
}

const FeatureTensor& FeatureExtractor::run(const CpiCube& cube) {
  const std::size_t nf = cfg_.num_subcarriers();
  const std::size_t na = cfg_.num_antennas;
  const std::size_t nt = cfg_.cpi_len;
  if (cube.data.dims() != std::array<std::size_t, 3>{nf, na, nt}) {
    throw Error(Errc::ShapeMismatch, "CPI cube shape does not match the configuration");
  }

  if (regrid_) {
    power_ = regrid_uniform(compute_csi_power(cube), cfg_).data;
  } else {
    auto src = cube.data.flat();
    auto dst = power_.flat();
    for (std::size_t n = 0; n < src.size(); ++n) dst[n] = std::norm(src[n]);
  }
  // Clutter removal commutes with the delay transform; doing it here keeps the
  // power cube ready for refinement.
  for (std::size_t j = 0; j < nf; ++j) {
    for (std::size_t i = 0; i < na; ++i) {
      auto row = power_.row(j, i);
      double mean = 0.0;
      for (double v : row) mean += v;
      mean /= static_cast<double>(nt);
      for (double& v : row) v -= mean;
    }
  }

  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t k = 0; k < nt; ++k) {
      auto row = delay_fft_.input_row(i * nt + k);
      for (std::size_t j = 0; j < nf; ++j) row[j] = power_(j, i, k);
    }
  }
  delay_fft_.execute();

  const std::size_t ndel = axes_.delay_bins.size();
  for (std::size_t d = 0; d < ndel; ++d) {
    const int m = axes_.delay_bins[d];
    for (std::size_t i = 0; i < na; ++i) {
      auto row = doppler_fft_.input_row(d * na + i);
      for (std::size_t k = 0; k < nt; ++k) {
        row[k] = window_[k] * steer_[i] * inverse_bin(delay_fft_.output_row(i * nt + k), m);
      }
    }
  }
  doppler_fft_.execute();

  const std::size_t naoa = axes_.aoa_bins.size();
  const std::size_t ndop = doppler_src_.size();
  std::vector<cplx> slab(na * ndop);
  for (std::size_t d = 0; d < ndel; ++d) {
    for (std::size_t i = 0; i < na; ++i) {
      auto out = doppler_fft_.output_row(d * na + i);
      for (std::size_t b = 0; b < ndop; ++b) slab[i * ndop + b] = out[doppler_src_[b]];
    }
    for (std::size_t a = 0; a < naoa; ++a) {
      auto dst = tensor_.data.row(d, a);
      std::fill(dst.begin(), dst.end(), cplx{});
      for (std::size_t i = 0; i < na; ++i) {
        const cplx kv = aoa_kernel_[a * na + i];
        for (std::size_t b = 0; b < ndop; ++b) dst[b] += kv * slab[i * ndop + b];
      }
    }
  }
  tensor_.start_time = cube.start_time;
  tensor_.time = cpi_centre(cube.start_time, cfg_);
  return tensor_;
}

double FeatureExtractor::delay_objective(const std::vector<cplx>& g, double bin) const {
  const cplx step = std::polar(1.0, kTwoPi * bin / static_cast<double>(cfg_.fft_bins_delay));
  cplx rot{1.0, 0.0};
  cplx acc{};
  for (const auto& v : g) {
    acc += v * rot;
    rot *= step;
  }
  return -std::abs(acc);
}

RefinedPeak FeatureExtractor::refine(const Peak& peak) const {
  const std::size_t nf = cfg_.num_subcarriers();
  const std::size_t na = cfg_.num_antennas;
  const std::size_t nt = cfg_.cpi_len;
  const double dt = cfg_.sample_interval;
  const double f_res = cfg_.doppler_resolution();

  double tau = axes_.delay_bins.at(peak.delay_idx);
  double u = aoa_cycles(axes_.aoa_bins.at(peak.aoa_idx), cfg_.fft_bins_aoa);
  double f = axes_.doppler_axis.at(peak.doppler_idx);

  std::vector<cplx> time_ph(nt), space_ph(na), g(nf), w(na * nt), v(na), s(nt);
  auto update_time = [&] {
    for (std::size_t k = 0; k < nt; ++k) {
      time_ph[k] = window_[k] * std::polar(1.0, -kTwoPi * f * static_cast<double>(k) * dt);
    }
  };
  auto update_space = [&] {
    for (std::size_t i = 0; i < na; ++i) space_ph[i] = steer_[i] * std::polar(1.0, -kTwoPi * static_cast<double>(i) * u);
  };
  const double tau0 = tau, u0 = u, f0 = f;

  for (int iter = 0; iter < 2; ++iter) {
    update_time();
    update_space();
    for (std::size_t j = 0; j < nf; ++j) {
      cplx acc{};
      for (std::size_t i = 0; i < na; ++i) {
        auto row = power_.row(j, i);
        cplx inner{};
        for (std::size_t k = 0; k < nt; ++k) inner += row[k] * time_ph[k];
        acc += space_ph[i] * inner;
      }
      g[j] = acc;
    }
    tau = scan_minimize([&](double b) { return delay_objective(g, b); }, tau0 - 1.0, tau0 + 1.0);

    // W_{i,k}: compensated series at the refined delay
    const cplx step = std::polar(1.0, kTwoPi * tau / static_cast<double>(cfg_.fft_bins_delay));
    std::fill(w.begin(), w.end(), cplx{});
    cplx rot{1.0, 0.0};
    for (std::size_t j = 0; j < nf; ++j) {
      for (std::size_t i = 0; i < na; ++i) {
        auto row = power_.row(j, i);
        for (std::size_t k = 0; k < nt; ++k) w[i * nt + k] += row[k] * rot;
      }
      rot *= step;
    }
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t k = 0; k < nt; ++k) w[i * nt + k] *= steer_[i];
    }

    if (na > 1) {
      for (std::size_t i = 0; i < na; ++i) {
        cplx acc{};
        for (std::size_t k = 0; k < nt; ++k) acc += w[i * nt + k] * time_ph[k];
        v[i] = acc;
      }
      const double du = 1.0 / static_cast<double>(cfg_.fft_bins_aoa);
      u = scan_minimize(
              [&](double uu) {
                cplx acc{};
                for (std::size_t i = 0; i < na; ++i) acc += v[i] * std::polar(1.0, -kTwoPi * static_cast<double>(i) * uu);
                return -std::abs(acc);
              },
              u0 - du, u0 + du);
    }

    for (std::size_t k = 0; k < nt; ++k) {
      cplx acc{};
      for (std::size_t i = 0; i < na; ++i) acc += w[i * nt + k] * std::polar(1.0, -kTwoPi * static_cast<double>(i) * u);
      s[k] = window_[k] * acc;
    }
    f = scan_minimize(
            [&](double ff) {
              const cplx st = std::polar(1.0, -kTwoPi * ff * dt);
              cplx r{1.0, 0.0};
              cplx acc{};
              for (std::size_t k = 0; k < nt; ++k) {
                acc += s[k] * r;
                r *= st;
              }
              return -std::abs(acc);
            },
            f0 - f_res, f0 + f_res);
  }

  RefinedPeak out;
  out.delay = tau * cfg_.delay_resolution();
  out.aoa = na > 1 ? std::asin(std::clamp(cfg_.wavelength() * u / cfg_.antenna_spacing, -1.0, 1.0)) : 0.0;
  out.doppler = f;
  return out;
}

}  // namespace powersense
