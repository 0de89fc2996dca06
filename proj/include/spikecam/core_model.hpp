#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spikecam/stream_codec.hpp"
#include "spikecam/types.hpp"

namespace spikecam {

struct SamplerConfig {
  double phi = 255.0;  // dispatch threshold, intensity x ticks
  ResetMode reset_mode = ResetMode::Drain;
  std::uint32_t i_max = 255;

  // Throws std::invalid_argument when phi <= 0, i_max < 1, or a Subtract
  // config has phi < i_max.
  void validate() const;
};

struct PixelState {
  double accumulator = 0.0;
  std::optional<std::uint64_t> last_fire_tick;
};

// Time-varying luminance field, stored tick-major (one W x H plane per tick).
class SceneSequence {
 public:
  SceneSequence() = default;
  SceneSequence(std::uint32_t width, std::uint32_t height, std::uint64_t num_ticks,
                std::uint32_t tick_rate, std::uint16_t fill = 0);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::uint64_t num_ticks() const { return num_ticks_; }
  std::uint32_t tick_rate() const { return tick_rate_; }
  std::size_t pixel_count() const { return std::size_t{width_} * height_; }

  std::uint16_t& at(std::uint32_t x, std::uint32_t y, std::uint64_t t);
  std::uint16_t at(std::uint32_t x, std::uint32_t y, std::uint64_t t) const;

  std::span<std::uint16_t> plane(std::uint64_t t);
  std::span<const std::uint16_t> plane(std::uint64_t t) const;

  std::uint16_t max_intensity() const;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::uint64_t num_ticks_ = 0;
  std::uint32_t tick_rate_ = 0;
  std::vector<std::uint16_t> samples_;
};

// Firing ticks of one pixel, with the ISIs between neighbours.
class SpikeTrainView {
 public:
  SpikeTrainView() = default;
  explicit SpikeTrainView(std::vector<std::uint64_t> ticks);

  static SpikeTrainView from_stream(const SpikeStream& stream, std::uint32_t x, std::uint32_t y);

  std::span<const std::uint64_t> ticks() const { return ticks_; }
  std::vector<std::uint64_t> isis() const;

 private:
  std::vector<std::uint64_t> ticks_;
};

// Advances every pixel by one tick: accumulate, compare with phi, reset on fire.
// `tick` is recorded as the firing tick of pixels that fire.
BitPlane integrate_tick(Grid<PixelState>& states, std::span<const std::uint16_t> intensities,
                        const SamplerConfig& config, std::uint64_t tick = 0);

// Incremental sampler holding the accumulator grid; step() is integrate_tick
// with an internal tick counter.
class Sampler {
 public:
  Sampler(std::uint32_t width, std::uint32_t height, SamplerConfig config);

  BitPlane step(std::span<const std::uint16_t> intensities);

  const Grid<PixelState>& states() const { return states_; }
  std::uint64_t tick() const { return tick_; }
  const SamplerConfig& config() const { return config_; }

 private:
  SamplerConfig config_;
  Grid<PixelState> states_;
  std::uint64_t tick_ = 0;
};

SpikeStream sample_sequence(const SceneSequence& scene, const SamplerConfig& config);

// Mean intensity over one ISI: phi / delta_t.
double estimate_intensity(std::uint64_t delta_t, double phi);

}  // namespace spikecam
