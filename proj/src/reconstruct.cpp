#include "spikecam/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spikecam {

std::uint16_t quantize(double value, std::uint32_t range) {
  if (!(value > 0.0)) return 0;
  const double rounded = std::floor(value + 0.5);
  return rounded >= range ? static_cast<std::uint16_t>(range) : static_cast<std::uint16_t>(rounded);
}

namespace {

void check_range(std::uint32_t range) {
  if (range == 0 || range > 65535) throw std::invalid_argument("frame: range must be in [1, 65535]");
}

void check_tick(std::uint64_t t, std::uint64_t num_ticks) {
  if (t >= num_ticks) throw std::out_of_range("decode: tick " + std::to_string(t) + " out of range");
}

}  // namespace

Frame tfi_frame(const SpikeIndex& index, std::uint64_t t, std::uint32_t range) {
  check_range(range);
  check_tick(t, index.num_ticks());
  Frame frame(index.width(), index.height(), range, t);
  for (std::size_t p = 0; p < frame.pixels.size(); ++p) {
    if (const auto isi = index.isi_before_pixel(p, t)) {
      frame.pixels[p] = quantize(static_cast<double>(range) / static_cast<double>(*isi), range);
    }
  }
  return frame;
}

Frame tfi_frame(const SpikeStream& stream, std::uint64_t t, std::uint32_t range) {
  check_range(range);
  check_tick(t, stream.num_ticks());
  TfiDecoder decoder(stream.width(), stream.height());
  for (std::uint64_t k = 0; k <= t; ++k) decoder.ingest(stream.plane(k));
  return decoder.frame(range);
}

Frame tfp_frame(const SpikeIndex& index, std::uint64_t t, std::uint64_t window, std::uint32_t range) {
  check_range(range);
  check_tick(t, index.num_ticks());
  if (window == 0) throw std::invalid_argument("tfp: window must be at least 1 tick");
  Frame frame(index.width(), index.height(), range, t);
  const double scale = static_cast<double>(range) / static_cast<double>(window);
  for (std::size_t p = 0; p < frame.pixels.size(); ++p) {
    frame.pixels[p] = quantize(scale * static_cast<double>(index.count_window_pixel(p, t, window)), range);
  }
  return frame;
}

Frame tfp_frame(const SpikeStream& stream, std::uint64_t t, std::uint64_t window, std::uint32_t range) {
  check_range(range);
  check_tick(t, stream.num_ticks());
  if (window == 0) throw std::invalid_argument("tfp: window must be at least 1 tick");
  Frame frame(stream.width(), stream.height(), range, t);
  std::vector<std::uint32_t> counts(frame.pixels.size(), 0);
  const std::uint64_t first = t + 1 >= window ? t + 1 - window : 0;
  for (std::uint64_t k = first; k <= t; ++k) {
    for_each_set_bit(stream.plane(k), [&](std::size_t p) { ++counts[p]; });
  }
  const double scale = static_cast<double>(range) / static_cast<double>(window);
  for (std::size_t p = 0; p < counts.size(); ++p) frame.pixels[p] = quantize(scale * counts[p], range);
  return frame;
}

TfiDecoder::TfiDecoder(std::uint32_t width, std::uint32_t height)
    : width_(width), height_(height), last_(std::size_t{width} * height, 0), prev_(last_.size(), 0) {}

void TfiDecoder::ingest(std::span<const std::uint8_t> plane) {
  if (plane.size() != plane_bytes(width_, height_)) throw std::invalid_argument("tfi: plane size mismatch");
  if (next_tick_ >= std::numeric_limits<std::uint32_t>::max()) throw std::overflow_error("tfi: too many ticks");
  const auto stamp = static_cast<std::uint32_t>(next_tick_ + 1);
  std::uint32_t* last = last_.data();
  std::uint32_t* prev = prev_.data();
  for_each_set_bit(plane, [&](std::size_t p) {
    prev[p] = last[p];
    last[p] = stamp;
  });
  ++next_tick_;
}

Frame TfiDecoder::frame(std::uint32_t range) const {
  check_range(range);
  if (next_tick_ == 0) throw std::logic_error("tfi: no planes ingested");
  Frame frame(width_, height_, range, next_tick_ - 1);
  for (std::size_t p = 0; p < last_.size(); ++p) {
    if (prev_[p] != 0) {
      frame.pixels[p] = quantize(static_cast<double>(range) / (last_[p] - prev_[p]), range);
    }
  }
  return frame;
}

TfpDecoder::TfpDecoder(std::uint32_t width, std::uint32_t height, std::uint64_t window)
    : width_(width), height_(height), window_(window), counts_(std::size_t{width} * height, 0) {
  if (window == 0) throw std::invalid_argument("tfp: window must be at least 1 tick");
  ring_.assign(window * plane_bytes(width, height), 0);
}

void TfpDecoder::ingest(std::span<const std::uint8_t> plane) {
  const std::size_t n = plane_bytes(width_, height_);
  if (plane.size() != n) throw std::invalid_argument("tfp: plane size mismatch");
  auto slot = std::span<std::uint8_t>(ring_).subspan((next_tick_ % window_) * n, n);
  std::uint32_t* counts = counts_.data();
  if (next_tick_ >= window_) for_each_set_bit(slot, [&](std::size_t p) { --counts[p]; });
  for_each_set_bit(plane, [&](std::size_t p) { ++counts[p]; });
  std::copy(plane.begin(), plane.end(), slot.begin());
  ++next_tick_;
}

Frame TfpDecoder::frame(std::uint32_t range) const {
  check_range(range);
  if (next_tick_ == 0) throw std::logic_error("tfp: no planes ingested");
  Frame frame(width_, height_, range, next_tick_ - 1);
  const double scale = static_cast<double>(range) / static_cast<double>(window_);
  for (std::size_t p = 0; p < counts_.size(); ++p) frame.pixels[p] = quantize(scale * counts_[p], range);
  return frame;
}

void TfaConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tfa: tau must be positive");
  if (!(delay >= 0.0) || !std::isfinite(delay)) throw std::invalid_argument("tfa: delay must be non-negative");
  if (window < 1) throw std::invalid_argument("tfa: window T must be at least 1");
  if (!(theta0 > 0.0)) throw std::invalid_argument("tfa: theta0 must be positive");
  if (effective_horizon() < 1 || effective_horizon() > 65534) {
    throw std::invalid_argument("tfa: kernel horizon must be in [1, 65534]");
  }
}

std::uint32_t TfaConfig::effective_horizon() const {
  if (horizon != 0) return horizon;
  auto kernel = [&](double d) {
    const double x = (d - delay) / tau;
    return x < 0 ? 0.0 : x * std::exp(1.0 - x);
  };
  // Past the peak at delay + tau the kernel only decreases.
  auto d = static_cast<std::uint32_t>(std::ceil(delay + tau));
  while (kernel(d) >= kKernelCutoff && d < 65534) ++d;
  return std::max<std::uint32_t>(d, 1);
}

double srm_kernel(std::int64_t t, std::int64_t s, const TfaConfig& config) {
  const std::int64_t d = t - s;
  if (d > static_cast<std::int64_t>(config.effective_horizon())) return 0.0;
  const double x = (static_cast<double>(d) - config.delay) / config.tau;
  if (x < 0.0) return 0.0;
  return x * std::exp(1.0 - x);
}

TfaState::TfaState(std::uint32_t width, std::uint32_t height, const TfaConfig& config)
    : width_(width), height_(height), config_(config) {
  config_.validate();
  horizon_ = config_.effective_horizon();
  kernel_.resize(horizon_ + 1);
  for (std::uint32_t d = 0; d <= horizon_; ++d) kernel_[d] = srm_kernel(d, 0, config_);

  const std::size_t pixels = std::size_t{width} * height;
  potential_.assign(pixels, 0.0);
  threshold_.assign(pixels, config_.theta0);
  window_count_.assign(pixels, 0);
  history_.assign(std::size_t{config_.window} * plane_bytes(width, height), 0);
  recent_.assign(pixels * (horizon_ + 1), 0);
  recent_head_.assign(pixels, 0);
  recent_size_.assign(pixels, 0);
  last_output_ = BitPlane(width, height);
}

void TfaState::step(std::span<const std::uint8_t> plane) {
  const std::size_t n = plane_bytes(width_, height_);
  if (plane.size() != n) throw std::invalid_argument("tfa: plane does not match state geometry");
  if (tick_ >= std::numeric_limits<std::uint32_t>::max()) throw std::overflow_error("tfa: too many ticks");

  const auto t = static_cast<std::uint32_t>(tick_);
  const std::uint32_t cap = horizon_ + 1;
  const bool by_output = config_.count_output_spikes;
  auto slot = std::span<std::uint8_t>(history_).subspan((tick_ % config_.window) * n, n);
  const bool evict = tick_ >= config_.window;

  BitPlane output(width_, height_);
  const std::size_t pixels = potential_.size();
  for (std::size_t p = 0; p < pixels; ++p) {
    const bool input = plane_bit(plane, p);
    std::uint32_t& count = window_count_[p];
    if (evict && plane_bit(slot, p)) --count;
    if (!by_output && input) ++count;

    // Input-spike ticks still inside the kernel horizon.
    std::uint32_t* ring = recent_.data() + p * cap;
    std::uint16_t& head = recent_head_[p];
    std::uint16_t& size = recent_size_[p];
    if (input) {
      ring[(head + size) % cap] = t;
      if (size < cap) {
        ++size;
      } else {
        head = static_cast<std::uint16_t>((head + 1) % cap);
      }
    }
    while (size > 0 && t - ring[head] > horizon_) {
      head = static_cast<std::uint16_t>((head + 1) % cap);
      --size;
    }
    double h = 0.0;
    for (std::uint16_t k = 0; k < size; ++k) h += kernel_[t - ring[(head + k) % cap]];

    double& u = potential_[p];
    double& theta = threshold_[p];
    u = h;
    const double spikes = static_cast<double>(count);
    if (u >= theta) {
      output.set(p);
      u = 0.0;
      size = 0;
      theta += std::exp(-spikes);
    } else {
      theta -= std::exp(-2.0 * spikes);
    }
    theta = std::max(theta, TfaConfig::kThresholdFloor);
    if (by_output && output.test(p)) ++count;
  }

  const auto counted = by_output ? output.bytes() : plane;
  std::copy(counted.begin(), counted.end(), slot.begin());
  last_output_ = std::move(output);
  ++tick_;
}

void tfa_step(TfaState& state, std::span<const std::uint8_t> plane) { state.step(plane); }

Frame tfa_texture(const TfaState& state, std::uint32_t range) {
  check_range(range);
  if (state.tick() == 0) throw std::logic_error("tfa: texture requested before any tick was processed");
  Frame frame(state.width(), state.height(), range, state.tick() - 1);
  const auto thresholds = state.thresholds();
  const auto [lo, hi] = std::minmax_element(thresholds.begin(), thresholds.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return frame;
  for (std::size_t p = 0; p < thresholds.size(); ++p) {
    frame.pixels[p] = quantize(static_cast<double>(range) * (thresholds[p] - *lo) / span, range);
  }
  return frame;
}

Frame tfa_frame(const SpikeStream& stream, std::uint64_t t, const TfaConfig& config, std::uint32_t range) {
  check_range(range);
  check_tick(t, stream.num_ticks());
  TfaState state(stream.width(), stream.height(), config);
  for (std::uint64_t k = 0; k <= t; ++k) tfa_step(state, stream.plane(k));
  return tfa_texture(state, range);
}

}  // namespace spikecam
