#pragma once

#include <cstddef>
#include <vector>

#include "powersense/core.hpp"
#include "powersense/fft.hpp"

namespace powersense {

// |CSI|^2, shape subcarriers x antennas x time.
struct PowerCube {
  Tensor3<double> data;
  double start_time = 0.0;
};

struct Peak {
  double delay = 0.0;    // s, relative to the direct path
  double aoa = 0.0;      // rad
  double doppler = 0.0;  // Hz
  double magnitude = 0.0;
  std::size_t delay_idx = 0;
  std::size_t aoa_idx = 0;
  std::size_t doppler_idx = 0;
};

PowerCube compute_csi_power(const CpiCube& cube);

// Linear interpolation onto the uniform grid spanning the same band.
// Returns the input unchanged when the subcarriers are already uniform.
PowerCube regrid_uniform(const PowerCube& p, const SystemConfig& cfg);

// Inverse FFT over subcarriers, zero-padded to fft_bins_delay, keeping the
// delay bins of make_axes(cfg). Shape delay x antennas x time.
Tensor3<cplx> delay_transform(const PowerCube& p, const SystemConfig& cfg);

// Subtracts the time mean of every (delay, antenna) series.
Tensor3<cplx> remove_static_clutter(Tensor3<cplx> x);

// Multiplies antenna i by exp(+j 2 pi i d sin(tx_aoa) / lambda).
Tensor3<cplx> compensate_tx_angle(Tensor3<cplx> x, const SystemConfig& cfg);

// Spatial and Doppler FFTs for every delay bin, shifted and gated to the
// physical AoA range and the configured speed limit.
FeatureTensor aoa_doppler_spectrum(const Tensor3<cplx>& x, const SystemConfig& cfg, double start_time = 0.0);

// Throws Error(EmptyTensor) when the tensor has no bins, Error(ShapeMismatch)
// when the axes do not match the data.
Peak find_global_peak(const FeatureTensor& t);

FeatureTensor extract_features(const CpiCube& cube, const SystemConfig& cfg);

// Sum of |Y|^2 over delay and AoA for every Doppler bin.
std::vector<double> doppler_profile(const FeatureTensor& t);

// Continuous estimate around a tensor peak.
struct RefinedPeak {
  double delay = 0.0;    // s, relative to the direct path
  double aoa = 0.0;      // rad
  double doppler = 0.0;  // Hz
};

// Reusable per-configuration workspace for the feature pipeline. Produces the
// same tensor as extract_features and keeps the clutter-free power of the last
// cube for peak refinement. Not thread safe; use one per thread.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const SystemConfig& cfg);

  const FeatureTensor& run(const CpiCube& cube);
  const FeatureTensor& tensor() const { return tensor_; }

  // Maximizes the unpadded transform magnitude around `peak` of the last run.
  RefinedPeak refine(const Peak& peak) const;

 private:
  double delay_objective(const std::vector<cplx>& g, double bin) const;

  SystemConfig cfg_;
  AxisLayout axes_;
  bool regrid_ = false;
  std::vector<double> window_;
  std::vector<cplx> steer_;       // per antenna, compensation
  std::vector<cplx> aoa_kernel_;  // aoa bin x antenna
  std::vector<std::size_t> delay_src_;
  std::vector<std::size_t> doppler_src_;
  Tensor3<double> power_;         // uniform grid, time mean removed
  RealBatchFft delay_fft_;
  BatchFft doppler_fft_;
  FeatureTensor tensor_;
};

}  // namespace powersense
