#include "spikecam/core_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace spikecam {

void SamplerConfig::validate() const {
  if (!(phi > 0.0)) throw std::invalid_argument("sampler: phi must be positive");
  if (i_max < 1) throw std::invalid_argument("sampler: i_max must be at least 1");
  if (reset_mode == ResetMode::Subtract && phi < static_cast<double>(i_max)) {
    throw std::invalid_argument("sampler: subtract mode requires phi >= i_max");
  }
}

SceneSequence::SceneSequence(std::uint32_t width, std::uint32_t height, std::uint64_t num_ticks,
                             std::uint32_t tick_rate, std::uint16_t fill)
    : width_(width), height_(height), num_ticks_(num_ticks), tick_rate_(tick_rate) {
  if (width == 0 || height == 0 || num_ticks == 0) {
    throw std::invalid_argument("scene: width, height and num_ticks must be at least 1");
  }
  if (tick_rate == 0) throw std::invalid_argument("scene: tick_rate must be positive");
  samples_.assign(pixel_count() * num_ticks, fill);
}

std::uint16_t& SceneSequence::at(std::uint32_t x, std::uint32_t y, std::uint64_t t) {
  return plane(t)[std::size_t{y} * width_ + x];
}

std::uint16_t SceneSequence::at(std::uint32_t x, std::uint32_t y, std::uint64_t t) const {
  return plane(t)[std::size_t{y} * width_ + x];
}

std::span<std::uint16_t> SceneSequence::plane(std::uint64_t t) {
  if (t >= num_ticks_) throw std::out_of_range("scene: tick out of range");
  return std::span<std::uint16_t>(samples_).subspan(t * pixel_count(), pixel_count());
}

std::span<const std::uint16_t> SceneSequence::plane(std::uint64_t t) const {
  if (t >= num_ticks_) throw std::out_of_range("scene: tick out of range");
  return std::span<const std::uint16_t>(samples_).subspan(t * pixel_count(), pixel_count());
}

std::uint16_t SceneSequence::max_intensity() const {
  return samples_.empty() ? 0 : *std::max_element(samples_.begin(), samples_.end());
}

SpikeTrainView::SpikeTrainView(std::vector<std::uint64_t> ticks) : ticks_(std::move(ticks)) {
  for (std::size_t i = 1; i < ticks_.size(); ++i) {
    if (ticks_[i] <= ticks_[i - 1]) {
      throw std::invalid_argument("spike train: firing ticks must be strictly increasing");
    }
  }
}

SpikeTrainView SpikeTrainView::from_stream(const SpikeStream& stream, std::uint32_t x,
                                           std::uint32_t y) {
  if (x >= stream.width() || y >= stream.height()) {
    throw std::out_of_range("spike train: pixel out of range");
  }
  std::vector<std::uint64_t> ticks;
  const std::size_t p = std::size_t{y} * stream.width() + x;
  for (std::uint64_t t = 0; t < stream.num_ticks(); ++t) {
    if (plane_bit(stream.plane(t), p)) ticks.push_back(t);
  }
  return SpikeTrainView(std::move(ticks));
}

std::vector<std::uint64_t> SpikeTrainView::isis() const {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 1; i < ticks_.size(); ++i) out.push_back(ticks_[i] - ticks_[i - 1]);
  return out;
}

BitPlane integrate_tick(Grid<PixelState>& states, std::span<const std::uint16_t> intensities,
                        const SamplerConfig& config, std::uint64_t tick) {
  if (intensities.size() != states.size()) {
    throw std::invalid_argument("integrate_tick: intensity plane does not match state grid");
  }
  BitPlane out(states.width(), states.height());
  const double phi = config.phi;
  for (std::size_t p = 0; p < intensities.size(); ++p) {
    const auto value = intensities[p];
    if (value > config.i_max) {
      throw std::invalid_argument("integrate_tick: intensity " + std::to_string(value) +
                                  " exceeds i_max " + std::to_string(config.i_max));
    }
    PixelState& s = states[p];
    s.accumulator += value;
    if (s.accumulator >= phi) {
      out.set(p);
      s.last_fire_tick = tick;
      s.accumulator = config.reset_mode == ResetMode::Drain ? 0.0 : s.accumulator - phi;
    }
  }
  return out;
}

Sampler::Sampler(std::uint32_t width, std::uint32_t height, SamplerConfig config)
    : config_(config), states_(width, height) {
  config_.validate();
}

BitPlane Sampler::step(std::span<const std::uint16_t> intensities) {
  BitPlane plane = integrate_tick(states_, intensities, config_, tick_);
  ++tick_;
  return plane;
}

SpikeStream sample_sequence(const SceneSequence& scene, const SamplerConfig& config) {
  config.validate();
  StreamHeader header;
  header.width = scene.width();
  header.height = scene.height();
  header.tick_rate = scene.tick_rate();
  header.num_ticks = 0;
  header.reset_mode = config.reset_mode;
  header.phi = config.phi;
  SpikeStream stream(header);
  Sampler sampler(scene.width(), scene.height(), config);
  for (std::uint64_t t = 0; t < scene.num_ticks(); ++t) stream.push_plane(sampler.step(scene.plane(t)));
  return stream;
}

double estimate_intensity(std::uint64_t delta_t, double phi) {
  if (delta_t == 0) throw std::invalid_argument("estimate_intensity: ISI must be at least 1 tick");
  return phi / static_cast<double>(delta_t);
}

}  // namespace spikecam
