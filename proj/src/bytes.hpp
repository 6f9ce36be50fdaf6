#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace powersense::bytes {

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t n = 0; n < sizeof(U); ++n) out.push_back(static_cast<std::uint8_t>(v >> (8 * n)));
}

inline void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) { put_le(out, v); }
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) { put_le(out, v); }
inline void put_f32(std::vector<std::uint8_t>& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::vector<std::uint8_t>& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t n = 0; n < sizeof(U); ++n) v |= static_cast<U>(static_cast<U>(p[n]) << (8 * n));
  return v;
}

// Sequential little-endian reader over a byte span. Callers check remaining().
class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  std::uint8_t u8() { return data_[pos_++]; }
  std::uint16_t u16() { return take<std::uint16_t>(); }
  std::uint32_t u32() { return take<std::uint32_t>(); }
  float f32() { return std::bit_cast<float>(take<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(take<std::uint64_t>()); }

 private:
  template <typename U>
  U take() {
    const U v = get_le<U>(data_.data() + pos_);
    pos_ += sizeof(U);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace powersense::bytes
