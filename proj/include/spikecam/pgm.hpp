#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spikecam {

class PgmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grayscale raster as read from a binary PGM (P5) file.
struct GrayImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t maxval = 255;
  std::vector<std::uint16_t> pixels;

  std::uint16_t at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * width + x]; }
};

// Accepts P5 only; anything else (P2, P6, PNG...) is rejected with PgmError.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::filesystem::path& path);

// maxval <= 255 writes one byte per sample, otherwise two (big-endian).
void write_pgm(std::ostream& out, std::uint32_t width, std::uint32_t height, std::uint32_t maxval,
               std::span<const std::uint16_t> pixels);
void write_pgm(const std::filesystem::path& path, std::uint32_t width, std::uint32_t height,
               std::uint32_t maxval, std::span<const std::uint16_t> pixels);

}  // namespace spikecam
