#include "spikecam/stream_codec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace spikecam {
namespace {

template <class T>
void put_le(std::uint8_t* out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<std::uint8_t>(value & 0xFF);
    value = static_cast<T>(value >> 8);
  }
}

template <class T>
T get_le(const std::uint8_t* in) {
  T value = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) value = static_cast<T>((value << 8) | in[i]);
  return value;
}

// Bytes left in `in` from its current position, if the stream is seekable.
std::optional<std::uint64_t> remaining_bytes(std::istream& in) {
  const auto here = in.tellg();
  if (here < 0) return std::nullopt;
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(here);
  if (end < 0 || !in) {
    in.clear();
    return std::nullopt;
  }
  return static_cast<std::uint64_t>(end - here);
}

std::uint64_t body_bytes(const StreamHeader& header) {
  const std::uint64_t per_plane = header.plane_bytes();
  if (header.num_ticks != 0 && per_plane > std::numeric_limits<std::uint64_t>::max() / header.num_ticks) {
    throw StreamError(StreamError::Kind::DimensionOverflow, "spike stream: body size overflows");
  }
  return per_plane * header.num_ticks;
}

}  // namespace

SpikeStream::SpikeStream(const StreamHeader& header) : header_(header) {
  const std::uint64_t bytes = body_bytes(header);
  if (bytes > std::numeric_limits<std::size_t>::max()) {
    throw StreamError(StreamError::Kind::DimensionOverflow, "spike stream: body too large");
  }
  body_.assign(static_cast<std::size_t>(bytes), 0);
}

std::span<const std::uint8_t> SpikeStream::plane(std::uint64_t t) const {
  if (t >= header_.num_ticks) throw std::out_of_range("spike stream: tick out of range");
  const std::size_t n = header_.plane_bytes();
  return std::span<const std::uint8_t>(body_).subspan(t * n, n);
}

std::span<std::uint8_t> SpikeStream::plane(std::uint64_t t) {
  if (t >= header_.num_ticks) throw std::out_of_range("spike stream: tick out of range");
  const std::size_t n = header_.plane_bytes();
  return std::span<std::uint8_t>(body_).subspan(t * n, n);
}

bool SpikeStream::spike(std::uint32_t x, std::uint32_t y, std::uint64_t t) const {
  if (x >= width() || y >= height()) throw std::out_of_range("spike stream: pixel out of range");
  return plane_bit(plane(t), std::size_t{y} * width() + x);
}

void SpikeStream::set_spike(std::uint32_t x, std::uint32_t y, std::uint64_t t) {
  if (x >= width() || y >= height()) throw std::out_of_range("spike stream: pixel out of range");
  const std::size_t p = std::size_t{y} * width() + x;
  plane(t)[p >> 3] |= static_cast<std::uint8_t>(1u << (p & 7));
}

void SpikeStream::push_plane(const BitPlane& plane) {
  if (plane.width() != width() || plane.height() != height()) {
    throw std::invalid_argument("spike stream: plane geometry does not match header");
  }
  body_.insert(body_.end(), plane.bytes().begin(), plane.bytes().end());
  ++header_.num_ticks;
}

std::uint64_t SpikeStream::total_spikes() const {
  std::uint64_t n = 0;
  for (auto b : body_) n += static_cast<std::uint64_t>(std::popcount(b));
  return n;
}

void write_header(const StreamHeader& header, std::ostream& out) {
  std::array<std::uint8_t, kHeaderBytes> buf{};
  std::memcpy(buf.data(), kStreamMagic, 4);
  put_le<std::uint16_t>(buf.data() + 4, kStreamVersion);
  buf[6] = static_cast<std::uint8_t>(header.reset_mode);
  buf[7] = 0;
  put_le<std::uint32_t>(buf.data() + 8, header.width);
  put_le<std::uint32_t>(buf.data() + 12, header.height);
  put_le<std::uint32_t>(buf.data() + 16, header.tick_rate);
  put_le<std::uint64_t>(buf.data() + 20, header.num_ticks);
  put_le<std::uint64_t>(buf.data() + 28, std::bit_cast<std::uint64_t>(header.phi));
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  if (!out) throw StreamError(StreamError::Kind::Io, "spike stream: header write failed");
}

StreamHeader read_header(std::istream& in) {
  std::array<std::uint8_t, kHeaderBytes> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), 4);
  if (in.gcount() != 4 || std::memcmp(buf.data(), kStreamMagic, 4) != 0) {
    throw StreamError(StreamError::Kind::NotASpikeStream, "not a spike stream (bad magic)");
  }
  in.read(reinterpret_cast<char*>(buf.data() + 4), kHeaderBytes - 4);
  if (static_cast<std::size_t>(in.gcount()) != kHeaderBytes - 4) {
    throw StreamError(StreamError::Kind::Truncated, "truncated stream: incomplete header");
  }
  const auto version = get_le<std::uint16_t>(buf.data() + 4);
  if (version != kStreamVersion) {
    throw StreamError(StreamError::Kind::UnsupportedVersion,
                      "unsupported spike stream version " + std::to_string(version));
  }
  if (buf[6] > 1 || buf[7] != 0) {
    throw StreamError(StreamError::Kind::Malformed, "spike stream: bad reset mode or reserved byte");
  }
  StreamHeader h;
  h.reset_mode = static_cast<ResetMode>(buf[6]);
  h.width = get_le<std::uint32_t>(buf.data() + 8);
  h.height = get_le<std::uint32_t>(buf.data() + 12);
  h.tick_rate = get_le<std::uint32_t>(buf.data() + 16);
  h.num_ticks = get_le<std::uint64_t>(buf.data() + 20);
  h.phi = std::bit_cast<double>(get_le<std::uint64_t>(buf.data() + 28));
  if (h.width == 0 || h.height == 0) {
    throw StreamError(StreamError::Kind::DimensionOverflow, "spike stream: zero width or height");
  }
  body_bytes(h);
  return h;
}

std::uint64_t write_stream(const SpikeStream& stream, std::ostream& out) {
  write_header(stream.header(), out);
  const auto body = stream.body();
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  if (!out) throw StreamError(StreamError::Kind::Io, "spike stream: body write failed");
  return kHeaderBytes + body.size();
}

SpikeStream read_stream(std::istream& in) {
  const StreamHeader header = read_header(in);
  const std::uint64_t need = body_bytes(header);
  if (auto left = remaining_bytes(in); left && *left < need) {
    throw StreamError(StreamError::Kind::Truncated,
                      "truncated stream: header declares " + std::to_string(header.num_ticks) +
                          " ticks but only " + std::to_string(*left / std::max<std::uint64_t>(1, header.plane_bytes())) +
                          " complete planes are present");
  }
  SpikeStream stream(header);
  in.read(reinterpret_cast<char*>(stream.body_.data()), static_cast<std::streamsize>(need));
  if (static_cast<std::uint64_t>(in.gcount()) != need) {
    throw StreamError(StreamError::Kind::Truncated, "truncated stream: missing plane bytes");
  }
  return stream;
}

void save_stream(const SpikeStream& stream, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StreamError(StreamError::Kind::Io, "cannot open " + path.string() + " for writing");
  write_stream(stream, out);
}

SpikeStream load_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StreamError(StreamError::Kind::Io, "cannot open " + path.string());
  return read_stream(in);
}

StreamHeader inspect_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StreamError(StreamError::Kind::Io, "cannot open " + path.string());
  const StreamHeader header = read_header(in);
  const auto left = remaining_bytes(in);
  if (left && *left < body_bytes(header)) {
    throw StreamError(StreamError::Kind::Truncated,
                      "truncated stream: header declares " + std::to_string(header.num_ticks) +
                          " ticks but the file is too short");
  }
  return header;
}

StreamWriter::StreamWriter(std::ostream& out, const StreamHeader& header) : out_(out), header_(header) {
  write_header(header_, out_);
}

void StreamWriter::write_plane(const BitPlane& plane) {
  if (plane.width() != header_.width || plane.height() != header_.height) {
    throw std::invalid_argument("stream writer: plane geometry does not match header");
  }
  write_plane(plane.bytes());
}

void StreamWriter::write_plane(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != header_.plane_bytes()) {
    throw std::invalid_argument("stream writer: plane byte length mismatch");
  }
  if (planes_written_ >= header_.num_ticks) {
    throw StreamError(StreamError::Kind::Malformed, "stream writer: more planes than declared");
  }
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out_) throw StreamError(StreamError::Kind::Io, "stream writer: write failed");
  ++planes_written_;
}

std::uint64_t StreamWriter::bytes_written() const {
  return kHeaderBytes + planes_written_ * header_.plane_bytes();
}

void StreamWriter::finish() {
  if (planes_written_ != header_.num_ticks) {
    throw StreamError(StreamError::Kind::Malformed, "stream writer: fewer planes than declared");
  }
  out_.flush();
  if (!out_) throw StreamError(StreamError::Kind::Io, "stream writer: flush failed");
}

StreamReader::StreamReader(std::istream& in) : in_(in), header_(read_header(in)) {}

bool StreamReader::next(std::span<std::uint8_t> out) {
  if (out.size() != header_.plane_bytes()) throw std::invalid_argument("stream reader: buffer size mismatch");
  if (planes_read_ >= header_.num_ticks) return false;
  in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (static_cast<std::size_t>(in_.gcount()) != out.size()) {
    throw StreamError(StreamError::Kind::Truncated,
                      "truncated stream: plane " + std::to_string(planes_read_) + " of " +
                          std::to_string(header_.num_ticks) + " is incomplete");
  }
  ++planes_read_;
  return true;
}

namespace {

void check_query(const SpikeStream& stream, std::uint32_t x, std::uint32_t y, std::uint64_t t) {
  if (x >= stream.width() || y >= stream.height()) throw std::out_of_range("query: pixel out of range");
  if (t >= stream.num_ticks()) throw std::out_of_range("query: tick out of range");
}

}  // namespace

std::optional<std::uint64_t> isi_before(const SpikeStream& stream, std::uint32_t x, std::uint32_t y,
                                        std::uint64_t t) {
  check_query(stream, x, y, t);
  const std::size_t p = std::size_t{y} * stream.width() + x;
  std::optional<std::uint64_t> latest;
  for (std::uint64_t k = t + 1; k-- > 0;) {
    if (!plane_bit(stream.plane(k), p)) continue;
    if (!latest) {
      latest = k;
    } else {
      return *latest - k;
    }
  }
  return std::nullopt;
}

std::uint64_t count_window(const SpikeStream& stream, std::uint32_t x, std::uint32_t y, std::uint64_t t,
                           std::uint64_t w) {
  check_query(stream, x, y, t);
  if (w == 0) throw std::invalid_argument("count_window: window must be at least 1 tick");
  const std::size_t p = std::size_t{y} * stream.width() + x;
  const std::uint64_t first = t + 1 >= w ? t + 1 - w : 0;
  std::uint64_t n = 0;
  for (std::uint64_t k = first; k <= t; ++k) n += plane_bit(stream.plane(k), p);
  return n;
}

SpikeIndex::SpikeIndex(const SpikeStream& stream)
    : width_(stream.width()), height_(stream.height()), num_ticks_(stream.num_ticks()) {
  if (num_ticks_ > std::numeric_limits<std::uint32_t>::max()) {
    throw StreamError(StreamError::Kind::DimensionOverflow, "spike index: too many ticks");
  }
  const std::size_t pixels = stream.pixel_count();
  offsets_.assign(pixels + 1, 0);
  for (std::uint64_t t = 0; t < num_ticks_; ++t) {
    for_each_set_bit(stream.plane(t), [&](std::size_t p) { ++offsets_[p + 1]; });
  }
  for (std::size_t p = 0; p < pixels; ++p) offsets_[p + 1] += offsets_[p];
  ticks_.resize(offsets_.back());
  std::vector<std::uint64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::uint64_t t = 0; t < num_ticks_; ++t) {
    const auto tick = static_cast<std::uint32_t>(t);
    for_each_set_bit(stream.plane(t), [&](std::size_t p) { ticks_[cursor[p]++] = tick; });
  }
}

std::span<const std::uint32_t> SpikeIndex::spikes(std::size_t pixel) const {
  return std::span<const std::uint32_t>(ticks_).subspan(offsets_[pixel], offsets_[pixel + 1] - offsets_[pixel]);
}

std::span<const std::uint32_t> SpikeIndex::spikes(std::uint32_t x, std::uint32_t y) const {
  if (x >= width_ || y >= height_) throw std::out_of_range("spike index: pixel out of range");
  return spikes(std::size_t{y} * width_ + x);
}

void SpikeIndex::check(std::uint32_t x, std::uint32_t y, std::uint64_t t) const {
  if (x >= width_ || y >= height_) throw std::out_of_range("query: pixel out of range");
  if (t >= num_ticks_) throw std::out_of_range("query: tick out of range");
}

std::optional<std::uint64_t> SpikeIndex::isi_before(std::uint32_t x, std::uint32_t y, std::uint64_t t) const {
  check(x, y, t);
  return isi_before_pixel(std::size_t{y} * width_ + x, t);
}

std::uint64_t SpikeIndex::count_window(std::uint32_t x, std::uint32_t y, std::uint64_t t,
                                       std::uint64_t w) const {
  check(x, y, t);
  if (w == 0) throw std::invalid_argument("count_window: window must be at least 1 tick");
  return count_window_pixel(std::size_t{y} * width_ + x, t, w);
}

std::optional<std::uint64_t> SpikeIndex::isi_before_pixel(std::size_t pixel, std::uint64_t t) const {
  const auto train = spikes(pixel);
  // First spike strictly after t.
  const auto end = std::upper_bound(train.begin(), train.end(), t,
                                    [](std::uint64_t v, std::uint32_t s) { return v < s; });
  const auto n = end - train.begin();
  if (n < 2) return std::nullopt;
  return std::uint64_t{train[n - 1]} - train[n - 2];
}

std::uint64_t SpikeIndex::count_window_pixel(std::size_t pixel, std::uint64_t t, std::uint64_t w) const {
  const auto train = spikes(pixel);
  auto after = [](std::uint64_t v, std::uint32_t s) { return v < s; };
  const auto end = std::upper_bound(train.begin(), train.end(), t, after);
  if (t + 1 <= w) return static_cast<std::uint64_t>(end - train.begin());
  const auto begin = std::upper_bound(train.begin(), end, t - w, after);
  return static_cast<std::uint64_t>(end - begin);
}

}  // namespace spikecam
