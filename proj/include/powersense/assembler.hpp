#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "powersense/core.hpp"

namespace powersense {

// Sliding CPI window of cpi_len samples advancing by cpi_stride. Missing
// samples are replaced by the previous sample in the window (or the next one
// at the window start); windows missing more than max_missing_fraction are
// skipped.
class CpiAssembler {
 public:
  explicit CpiAssembler(const SystemConfig& cfg);

  std::vector<CpiCube> push(const CsiRecord& rec);
  std::vector<CpiCube> push_gap(std::uint64_t count);

  std::uint64_t emitted() const { return emitted_; }
  std::uint64_t skipped() const { return skipped_; }
  std::uint64_t filled_cubes() const { return filled_cubes_; }
  // Records with non-finite entries, treated as missing samples.
  std::uint64_t rejected() const { return rejected_; }

 private:
  std::vector<CpiCube> advance();
  CpiCube build(std::size_t missing) const;

  SystemConfig cfg_;
  std::deque<std::optional<CsiRecord>> slots_;
  std::uint64_t window_start_ = 0;  // sample index of slots_.front()
  std::optional<double> time_origin_;
  std::uint64_t emitted_ = 0;
  std::uint64_t skipped_ = 0;
  std::uint64_t filled_cubes_ = 0;
  std::uint64_t rejected_ = 0;
};

}  // namespace powersense
