#include "spikecam/pgm.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

namespace spikecam {
namespace {

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

std::uint32_t read_field(std::istream& in, const char* what) {
  skip_space_and_comments(in);
  std::uint64_t value = 0;
  if (!(in >> value) || value > 0xFFFFFFFFull) throw PgmError(std::string("pgm: bad ") + what);
  return static_cast<std::uint32_t>(value);
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  char magic[2] = {};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P') throw PgmError("pgm: not a PNM file");
  if (magic[1] == '6' || magic[1] == '3') throw PgmError("pgm: color images are not supported");
  if (magic[1] != '5') throw PgmError(std::string("pgm: unsupported format P") + magic[1]);

  GrayImage img;
  img.width = read_field(in, "width");
  img.height = read_field(in, "height");
  img.maxval = read_field(in, "maxval");
  if (img.width == 0 || img.height == 0) throw PgmError("pgm: zero dimension");
  if (img.maxval == 0 || img.maxval > 65535) throw PgmError("pgm: bad maxval");
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) throw PgmError("pgm: missing raster separator");

  const std::size_t n = std::size_t{img.width} * img.height;
  const std::size_t sample_bytes = img.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(n * sample_bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw PgmError("pgm: truncated raster");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.pixels[i] = sample_bytes == 1 ? raw[i]
                                      : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    if (img.pixels[i] > img.maxval) throw PgmError("pgm: sample exceeds maxval");
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmError("pgm: cannot open " + path.string());
  try {
    return read_pgm(in);
  } catch (const PgmError& e) {
    throw PgmError(path.string() + ": " + e.what());
  }
}

void write_pgm(std::ostream& out, std::uint32_t width, std::uint32_t height, std::uint32_t maxval,
               std::span<const std::uint16_t> pixels) {
  if (pixels.size() != std::size_t{width} * height) throw PgmError("pgm: pixel count mismatch");
  if (maxval == 0 || maxval > 65535) throw PgmError("pgm: bad maxval");
  out << "P5\n" << width << ' ' << height << '\n' << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(pixels.size() * (maxval > 255 ? 2 : 1));
  for (auto v : pixels) {
    if (maxval > 255) raw.push_back(static_cast<unsigned char>(v >> 8));
    raw.push_back(static_cast<unsigned char>(v & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw PgmError("pgm: write failed");
}

void write_pgm(const std::filesystem::path& path, std::uint32_t width, std::uint32_t height,
               std::uint32_t maxval, std::span<const std::uint16_t> pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PgmError("pgm: cannot open " + path.string() + " for writing");
  write_pgm(out, width, height, maxval, pixels);
}

}  // namespace spikecam
