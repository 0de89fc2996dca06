#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

namespace spikecam {

// Accumulator behavior after a pixel fires.
enum class ResetMode : std::uint8_t { Drain = 0, Subtract = 1 };

const char* to_string(ResetMode mode);

enum class Polarity : std::int8_t { On = 1, Off = -1 };

struct Event {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint64_t tick = 0;
  Polarity polarity = Polarity::On;

  friend bool operator==(const Event&, const Event&) = default;
};

// Dense row-major W x H grid.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::uint32_t width, std::uint32_t height, const T& fill = T{})
      : width_(width), height_(height), cells_(std::size_t{width} * height, fill) {}

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  T& operator()(std::uint32_t x, std::uint32_t y) { return cells_[index(x, y)]; }
  const T& operator()(std::uint32_t x, std::uint32_t y) const { return cells_[index(x, y)]; }
  T& operator[](std::size_t p) { return cells_[p]; }
  const T& operator[](std::size_t p) const { return cells_[p]; }

  std::span<T> cells() { return cells_; }
  std::span<const T> cells() const { return cells_; }

 private:
  std::size_t index(std::uint32_t x, std::uint32_t y) const {
    return std::size_t{y} * width_ + x;
  }

  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<T> cells_;
};

// Bytes needed for one packed W x H plane.
constexpr std::size_t plane_bytes(std::uint32_t width, std::uint32_t height) {
  return (std::size_t{width} * height + 7) / 8;
}

// Bit p of an LSB-first packed plane.
inline bool plane_bit(std::span<const std::uint8_t> plane, std::size_t p) {
  return (plane[p >> 3] >> (p & 7)) & 1u;
}

// Calls fn(p) for every set bit of a packed plane, in increasing pixel order.
template <class Fn>
void for_each_set_bit(std::span<const std::uint8_t> plane, Fn&& fn) {
  const std::size_t n = plane.size();
  std::size_t byte = 0;
  for (; byte + 8 <= n; byte += 8) {
    std::uint64_t word;
    std::memcpy(&word, plane.data() + byte, sizeof(word));
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap64(word);
    while (word) {
      fn(byte * 8 + static_cast<std::size_t>(std::countr_zero(word)));
      word &= word - 1;
    }
  }
  for (; byte < n; ++byte) {
    unsigned bits = plane[byte];
    while (bits) {
      fn(byte * 8 + static_cast<std::size_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
}

// One tick's W x H binary spike readout, packed LSB-first in row-major order.
class BitPlane {
 public:
  BitPlane() = default;
  BitPlane(std::uint32_t width, std::uint32_t height)
      : width_(width), height_(height), bytes_(plane_bytes(width, height), 0) {}

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t pixel_count() const { return std::size_t{width_} * height_; }

  bool test(std::size_t p) const { return plane_bit(bytes_, p); }
  bool get(std::uint32_t x, std::uint32_t y) const { return test(std::size_t{y} * width_ + x); }

  void set(std::size_t p) { bytes_[p >> 3] |= static_cast<std::uint8_t>(1u << (p & 7)); }
  void set(std::uint32_t x, std::uint32_t y) { set(std::size_t{y} * width_ + x); }

  std::size_t count() const;

  std::span<const std::uint8_t> bytes() const { return bytes_; }
  std::span<std::uint8_t> bytes() { return bytes_; }

  friend bool operator==(const BitPlane&, const BitPlane&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> bytes_;
};

}  // namespace spikecam
