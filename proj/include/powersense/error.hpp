#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace powersense {

enum class Errc {
  InvalidConfig,
  Parse,
  Io,
  NonPhysicalBin,
  DegenerateGeometry,
  TrajectoryOutOfBounds,
  EmptyTensor,
  InsufficientData,
  AllZero,
  NumericalFailure,
  BadMagic,
  VersionMismatch,
  TruncatedRecord,
  NonMonotoneTimestamp,
  ShapeMismatch,
  MalformedDatagram,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Thrown by the CSI reader when the file ends inside a record.
class TruncatedRecordError : public Error {
 public:
  TruncatedRecordError(std::size_t recovered, const std::string& what)
      : Error(Errc::TruncatedRecord, what), recovered_(recovered) {}

  // Number of complete records read before the truncation.
  std::size_t recovered() const noexcept { return recovered_; }

 private:
  std::size_t recovered_;
};

}  // namespace powersense
