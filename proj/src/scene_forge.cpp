#include "spikecam/scene_forge.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spikecam {

const char* to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::Constant:
      return "constant";
    case SceneKind::Step:
      return "step";
    case SceneKind::MovingBar:
      return "bar";
    case SceneKind::SpinningDisc:
      return "disc";
    case SceneKind::ImageSequence:
      return "images";
  }
  return "unknown";
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("scene: " + msg);
}

void require_level(std::uint32_t value, std::uint32_t i_max, const char* name) {
  require(value <= i_max, std::string(name) + " exceeds i_max");
}

// Even-odd point-in-polygon test.
bool inside_polygon(std::span<const std::array<double, 2>> poly, double px, double py) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

}  // namespace

void SceneSpec::validate() const {
  require(tick_rate > 0, "tick_rate must be positive");
  require(i_max >= 1, "i_max must be at least 1");
  if (kind != SceneKind::ImageSequence) {
    require(width >= 1 && height >= 1, "width and height must be at least 1");
    require(num_ticks >= 1, "num_ticks must be at least 1");
  }
  switch (kind) {
    case SceneKind::Constant:
      require_level(intensity, i_max, "intensity");
      break;
    case SceneKind::Step:
      require_level(step_from, i_max, "step_from");
      require_level(step_to, i_max, "step_to");
      if (step_region) {
        require(step_region->width >= 1 && step_region->height >= 1, "empty step region");
        require(std::uint64_t{step_region->x} + step_region->width <= width &&
                    std::uint64_t{step_region->y} + step_region->height <= height,
                "step region outside the image");
      }
      break;
    case SceneKind::MovingBar:
      require(bar_width >= 1, "bar_width must be at least 1");
      require(std::isfinite(bar_speed), "bar_speed must be finite");
      require_level(bar_intensity, i_max, "bar_intensity");
      require_level(background, i_max, "background");
      break;
    case SceneKind::SpinningDisc:
      require(rpm > 0 && std::isfinite(rpm), "rpm must be positive");
      require(disc_radius >= 0, "disc_radius must be non-negative");
      require_level(pattern_intensity, i_max, "pattern_intensity");
      require_level(disc_intensity, i_max, "disc_intensity");
      require_level(outside_intensity, i_max, "outside_intensity");
      break;
    case SceneKind::ImageSequence:
      require(!image_paths.empty(), "image sequence needs at least one file");
      require(ticks_per_frame >= 1, "ticks_per_frame must be at least 1");
      break;
  }
}

GrayImage default_disc_mask(std::uint32_t radius) {
  const std::uint32_t side = 2 * radius + 1;
  GrayImage mask{side, side, 255, std::vector<std::uint16_t>(std::size_t{side} * side, 0)};
  const double r = radius;

  // Five-pointed star on the +u side.
  std::vector<std::array<double, 2>> star;
  const double star_cx = 0.45 * r;
  for (int k = 0; k < 10; ++k) {
    const double a = std::numbers::pi / 2 + k * std::numbers::pi / 5;
    const double rad = (k % 2 == 0 ? 0.32 : 0.13) * r;
    star.push_back({star_cx + rad * std::cos(a), rad * std::sin(a)});
  }
  // Aircraft on the -u side: fuselage, wings and tailplane.
  const double plane_cx = -0.45 * r;
  auto in_plane = [&](double u, double v) {
    const double du = u - plane_cx;
    const bool fuselage = std::abs(du) <= 0.30 * r && std::abs(v) <= 0.05 * r;
    const bool wings = std::abs(du + 0.02 * r) <= 0.07 * r && std::abs(v) <= 0.28 * r;
    const bool tail = std::abs(du - 0.24 * r) <= 0.04 * r && std::abs(v) <= 0.12 * r;
    return fuselage || wings || tail;
  };

  for (std::uint32_t j = 0; j < side; ++j) {
    for (std::uint32_t i = 0; i < side; ++i) {
      const double u = static_cast<double>(i) - r;
      const double v = static_cast<double>(j) - r;
      if (inside_polygon(star, u, v) || in_plane(u, v)) mask.pixels[std::size_t{j} * side + i] = 255;
    }
  }
  return mask;
}

SceneRenderer::SceneRenderer(SceneSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind == SceneKind::ImageSequence) {
    for (const auto& path : spec_.image_paths) {
      GrayImage img = read_pgm(path);
      if (img.maxval > 255) throw std::invalid_argument("scene: " + path + " is not an 8-bit image");
      if (!images_.empty() && (img.width != images_.front().width || img.height != images_.front().height)) {
        throw std::invalid_argument("scene: " + path + " differs in size from " + spec_.image_paths.front());
      }
      for (auto v : img.pixels) require_level(v, spec_.i_max, "image sample");
      images_.push_back(std::move(img));
    }
    spec_.width = images_.front().width;
    spec_.height = images_.front().height;
    const std::uint64_t n = images_.size();
    if (spec_.interpolation == Interpolation::Hold || n == 1) {
      spec_.num_ticks = n * spec_.ticks_per_frame;
    } else {
      spec_.num_ticks = (n - 1) * spec_.ticks_per_frame + 1;
    }
  }
  if (spec_.kind == SceneKind::SpinningDisc) {
    radius_ = spec_.disc_radius > 0 ? spec_.disc_radius : 0.45 * std::min(spec_.width, spec_.height);
    if (spec_.mask_path.empty()) {
      mask_ = default_disc_mask();
    } else {
      mask_ = read_pgm(spec_.mask_path);
      if (mask_.width != mask_.height) throw std::invalid_argument("scene: disc mask must be square");
    }
  }
}

double SceneRenderer::disc_turns(std::uint64_t t) const {
  // Exact for integer rpm and tick counts, so whole periods land on 0.
  const double ticks_per_minute = 60.0 * spec_.tick_rate;
  return std::fmod(spec_.rpm * static_cast<double>(t), ticks_per_minute) / ticks_per_minute;
}

bool SceneRenderer::inside_disc(std::uint32_t x, std::uint32_t y) const {
  const double dx = x - (spec_.width - 1) / 2.0;
  const double dy = y - (spec_.height - 1) / 2.0;
  return dx * dx + dy * dy <= radius_ * radius_;
}

bool SceneRenderer::mask_at(double dx, double dy, double turns) const {
  const double a = 2.0 * std::numbers::pi * turns;
  const double c = std::cos(a);
  const double s = std::sin(a);
  // Rotate the sample point back into the mask's frame.
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  const double half = (mask_.width - 1) / 2.0;
  const double scale = half / radius_;
  const long i = std::lround(u * scale + half);
  const long j = std::lround(v * scale + half);
  if (i < 0 || j < 0 || i >= static_cast<long>(mask_.width) || j >= static_cast<long>(mask_.height)) return false;
  return mask_.at(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)) * 2 > mask_.maxval;
}

std::uint16_t SceneRenderer::disc_value(std::uint32_t x, std::uint32_t y, double turns) const {
  if (!inside_disc(x, y)) return spec_.outside_intensity;
  const double dx = x - (spec_.width - 1) / 2.0;
  const double dy = y - (spec_.height - 1) / 2.0;
  return mask_at(dx, dy, turns) ? spec_.pattern_intensity : spec_.disc_intensity;
}

bool SceneRenderer::pattern_at(std::uint32_t x, std::uint32_t y, std::uint64_t t) const {
  if (spec_.kind != SceneKind::SpinningDisc) return false;
  if (!inside_disc(x, y)) return false;
  const double dx = x - (spec_.width - 1) / 2.0;
  const double dy = y - (spec_.height - 1) / 2.0;
  return mask_at(dx, dy, disc_turns(t));
}

void SceneRenderer::render(std::uint64_t t, std::span<std::uint16_t> out) const {
  const std::uint32_t w = spec_.width;
  const std::uint32_t h = spec_.height;
  if (out.size() != std::size_t{w} * h) throw std::invalid_argument("scene: output plane size mismatch");
  if (t >= spec_.num_ticks) throw std::out_of_range("scene: tick out of range");

  switch (spec_.kind) {
    case SceneKind::Constant:
      std::fill(out.begin(), out.end(), spec_.intensity);
      break;
    case SceneKind::Step: {
      const std::uint16_t now = t < spec_.step_tick ? spec_.step_from : spec_.step_to;
      for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
          const bool changes = !spec_.step_region || spec_.step_region->contains(x, y);
          out[std::size_t{y} * w + x] = changes ? now : spec_.step_from;
        }
      }
      break;
    }
    case SceneKind::MovingBar: {
      const double pos = spec_.bar_speed * static_cast<double>(t);
      const double left = pos - std::floor(pos / w) * w;
      for (std::uint32_t x = 0; x < w; ++x) {
        double rel = x - std::floor(left);
        if (rel < 0) rel += w;
        const std::uint16_t v = rel < spec_.bar_width ? spec_.bar_intensity : spec_.background;
        for (std::uint32_t y = 0; y < h; ++y) out[std::size_t{y} * w + x] = v;
      }
      break;
    }
    case SceneKind::SpinningDisc: {
      const double turns = disc_turns(t);
      for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) out[std::size_t{y} * w + x] = disc_value(x, y, turns);
      }
      break;
    }
    case SceneKind::ImageSequence: {
      const std::uint64_t n = spec_.ticks_per_frame;
      const std::uint64_t k = t / n;
      if (spec_.interpolation == Interpolation::Hold || images_.size() == 1) {
        const auto& img = images_[std::min<std::uint64_t>(k, images_.size() - 1)];
        std::copy(img.pixels.begin(), img.pixels.end(), out.begin());
      } else if (k + 1 >= images_.size()) {
        std::copy(images_.back().pixels.begin(), images_.back().pixels.end(), out.begin());
      } else {
        const std::uint64_t j = t - k * n;
        const auto& a = images_[k].pixels;
        const auto& b = images_[k + 1].pixels;
        for (std::size_t p = 0; p < out.size(); ++p) {
          // round-half-up of a + (b - a) * j / n in integer arithmetic
          const std::uint64_t num = 2 * (std::uint64_t{a[p]} * (n - j) + std::uint64_t{b[p]} * j) + n;
          out[p] = static_cast<std::uint16_t>(num / (2 * n));
        }
      }
      break;
    }
  }
}

SceneSequence generate(const SceneSpec& spec) {
  const SceneRenderer renderer(spec);
  SceneSequence scene(renderer.width(), renderer.height(), renderer.num_ticks(), spec.tick_rate);
  for (std::uint64_t t = 0; t < scene.num_ticks(); ++t) renderer.render(t, scene.plane(t));
  return scene;
}

SceneSequence ingest_images(const std::vector<std::string>& paths, std::uint32_t tick_rate,
                            Interpolation interpolation, std::uint64_t ticks_per_frame) {
  SceneSpec spec;
  spec.kind = SceneKind::ImageSequence;
  spec.image_paths = paths;
  spec.tick_rate = tick_rate;
  spec.interpolation = interpolation;
  spec.ticks_per_frame = ticks_per_frame;
  return generate(spec);
}

}  // namespace spikecam
