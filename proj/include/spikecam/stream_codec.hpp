#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikecam/types.hpp"

namespace spikecam {

// Default geometry and rate of a typical spike camera capture.
inline constexpr std::uint32_t kDefaultWidth = 400;
inline constexpr std::uint32_t kDefaultHeight = 250;
inline constexpr std::uint32_t kDefaultTickRate = 40000;

inline constexpr char kStreamMagic[4] = {'S', 'P', 'K', 'S'};
inline constexpr std::uint16_t kStreamVersion = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 1 + 4 + 4 + 4 + 8 + 8;

class StreamError : public std::runtime_error {
 public:
  enum class Kind { NotASpikeStream, UnsupportedVersion, Truncated, DimensionOverflow, Malformed, Io };

  StreamError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct StreamHeader {
  std::uint32_t width = kDefaultWidth;
  std::uint32_t height = kDefaultHeight;
  std::uint32_t tick_rate = kDefaultTickRate;
  std::uint64_t num_ticks = 0;
  ResetMode reset_mode = ResetMode::Drain;
  double phi = 255.0;

  std::size_t plane_bytes() const { return spikecam::plane_bytes(width, height); }
  std::size_t pixel_count() const { return std::size_t{width} * height; }

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

// Header plus num_ticks packed bit planes, stored contiguously.
class SpikeStream {
 public:
  SpikeStream() = default;
  // Allocates num_ticks all-zero planes.
  explicit SpikeStream(const StreamHeader& header);

  const StreamHeader& header() const { return header_; }
  std::uint32_t width() const { return header_.width; }
  std::uint32_t height() const { return header_.height; }
  std::uint64_t num_ticks() const { return header_.num_ticks; }
  std::size_t pixel_count() const { return header_.pixel_count(); }

  std::span<const std::uint8_t> plane(std::uint64_t t) const;
  std::span<std::uint8_t> plane(std::uint64_t t);
  std::span<const std::uint8_t> body() const { return body_; }

  bool spike(std::uint32_t x, std::uint32_t y, std::uint64_t t) const;
  void set_spike(std::uint32_t x, std::uint32_t y, std::uint64_t t);

  // Appends one plane; its geometry must match the header.
  void push_plane(const BitPlane& plane);

  std::uint64_t total_spikes() const;

  friend bool operator==(const SpikeStream&, const SpikeStream&) = default;

 private:
  friend SpikeStream read_stream(std::istream& in);

  StreamHeader header_;
  std::vector<std::uint8_t> body_;
};

void write_header(const StreamHeader& header, std::ostream& out);
StreamHeader read_header(std::istream& in);

// Returns the number of bytes written.
std::uint64_t write_stream(const SpikeStream& stream, std::ostream& out);
SpikeStream read_stream(std::istream& in);

void save_stream(const SpikeStream& stream, const std::filesystem::path& path);
SpikeStream load_stream(const std::filesystem::path& path);

// Reads only the header and checks that the file holds every declared plane.
StreamHeader inspect_stream(const std::filesystem::path& path);

// Writes a stream plane by plane without holding it in memory. The header's
// num_ticks must equal the number of planes eventually written.
class StreamWriter {
 public:
  StreamWriter(std::ostream& out, const StreamHeader& header);

  void write_plane(const BitPlane& plane);
  void write_plane(std::span<const std::uint8_t> bytes);

  std::uint64_t planes_written() const { return planes_written_; }
  std::uint64_t bytes_written() const;

  // Throws StreamError if fewer planes than declared were written.
  void finish();

 private:
  std::ostream& out_;
  StreamHeader header_;
  std::uint64_t planes_written_ = 0;
};

// Reads planes one at a time after the header.
class StreamReader {
 public:
  explicit StreamReader(std::istream& in);

  const StreamHeader& header() const { return header_; }
  std::uint64_t planes_read() const { return planes_read_; }

  // Fills `out` (plane_bytes() long) with the next plane; false after the last.
  // Throws StreamError if the source ends early.
  bool next(std::span<std::uint8_t> out);

 private:
  std::istream& in_;
  StreamHeader header_;
  std::uint64_t planes_read_ = 0;
};

// Plane-scanning queries. isi_before looks at spikes with tick <= t;
// count_window counts spikes with tick in (t - w, t], clipped at 0.
std::optional<std::uint64_t> isi_before(const SpikeStream& stream, std::uint32_t x,
                                        std::uint32_t y, std::uint64_t t);
std::uint64_t count_window(const SpikeStream& stream, std::uint32_t x, std::uint32_t y,
                           std::uint64_t t, std::uint64_t w);

// Per-pixel sorted spike ticks (CSR layout) built once from a loaded stream.
// Answers the same queries as the plane-scanning functions in O(log n).
class SpikeIndex {
 public:
  explicit SpikeIndex(const SpikeStream& stream);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::uint64_t num_ticks() const { return num_ticks_; }

  std::span<const std::uint32_t> spikes(std::size_t pixel) const;
  std::span<const std::uint32_t> spikes(std::uint32_t x, std::uint32_t y) const;

  std::optional<std::uint64_t> isi_before(std::uint32_t x, std::uint32_t y, std::uint64_t t) const;
  std::uint64_t count_window(std::uint32_t x, std::uint32_t y, std::uint64_t t,
                             std::uint64_t w) const;

  // Unchecked per-pixel variants used by the frame decoders.
  std::optional<std::uint64_t> isi_before_pixel(std::size_t pixel, std::uint64_t t) const;
  std::uint64_t count_window_pixel(std::size_t pixel, std::uint64_t t, std::uint64_t w) const;

 private:
  void check(std::uint32_t x, std::uint32_t y, std::uint64_t t) const;

  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::uint64_t num_ticks_ = 0;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> ticks_;
};

}  // namespace spikecam
