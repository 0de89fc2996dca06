#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikecam/core_model.hpp"
#include "spikecam/pgm.hpp"

namespace spikecam {

enum class SceneKind { Constant, Step, MovingBar, SpinningDisc, ImageSequence };
enum class Interpolation { Hold, Linear };

const char* to_string(SceneKind kind);

struct Rect {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  bool contains(std::uint32_t px, std::uint32_t py) const {
    return px >= x && py >= y && px - x < width && py - y < height;
  }
};

struct SceneSpec {
  SceneKind kind = SceneKind::Constant;
  std::uint32_t width = 64;
  std::uint32_t height = 64;
  std::uint64_t num_ticks = 1000;  // ignored for ImageSequence
  std::uint32_t tick_rate = kDefaultTickRate;
  std::uint32_t i_max = 255;

  // Constant
  std::uint16_t intensity = 128;

  // Step: `step_from` before step_tick, `step_to` from step_tick on. With a
  // region, only pixels inside it change.
  std::uint16_t step_from = 64;
  std::uint16_t step_to = 192;
  std::uint64_t step_tick = 50;
  std::optional<Rect> step_region;

  // MovingBar: vertical bar sliding right, wrapping at the image edge.
  std::uint32_t bar_width = 8;
  double bar_speed = 0.05;  // pixels per tick
  std::uint16_t bar_intensity = 200;
  std::uint16_t background = 50;

  // SpinningDisc
  double rpm = 2000.0;
  std::uint16_t pattern_intensity = 200;
  std::uint16_t disc_intensity = 50;
  std::uint16_t outside_intensity = 0;
  double disc_radius = 0.0;   // 0 picks 0.45 * min(width, height)
  std::string mask_path;      // PGM; samples > maxval/2 are pattern. Empty uses the built-in mask.

  // ImageSequence
  std::vector<std::string> image_paths;
  Interpolation interpolation = Interpolation::Hold;
  std::uint64_t ticks_per_frame = 100;

  // Throws std::invalid_argument on bad parameters.
  void validate() const;
};

// Renders one tick of a scene at a time, so long scenes never need to be
// materialized. Image files and the disc mask are loaded once on construction.
class SceneRenderer {
 public:
  explicit SceneRenderer(SceneSpec spec);

  const SceneSpec& spec() const { return spec_; }
  std::uint32_t width() const { return spec_.width; }
  std::uint32_t height() const { return spec_.height; }
  std::uint64_t num_ticks() const { return spec_.num_ticks; }

  void render(std::uint64_t t, std::span<std::uint16_t> out) const;

  // SpinningDisc ground truth: is (x, y) covered by a bright pattern at tick t.
  bool pattern_at(std::uint32_t x, std::uint32_t y, std::uint64_t t) const;
  // SpinningDisc: does (x, y) lie inside the disc.
  bool inside_disc(std::uint32_t x, std::uint32_t y) const;
  // Rotation angle in turns, in [0, 1).
  double disc_turns(std::uint64_t t) const;
  double disc_radius() const { return radius_; }

 private:
  std::uint16_t disc_value(std::uint32_t x, std::uint32_t y, double turns) const;
  bool mask_at(double dx, double dy, double turns) const;

  SceneSpec spec_;
  std::vector<GrayImage> images_;
  GrayImage mask_;
  double radius_ = 0.0;
};

SceneSequence generate(const SceneSpec& spec);

SceneSequence ingest_images(const std::vector<std::string>& paths, std::uint32_t tick_rate,
                            Interpolation interpolation, std::uint64_t ticks_per_frame);

// Built-in disc texture: a pentagram and an aircraft silhouette on a square
// raster of side 2 * radius + 1; pattern pixels are 255, the rest 0.
GrayImage default_disc_mask(std::uint32_t radius = 64);

}  // namespace spikecam
