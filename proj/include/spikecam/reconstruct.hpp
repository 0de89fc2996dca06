#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spikecam/stream_codec.hpp"
#include "spikecam/types.hpp"

namespace spikecam {

inline constexpr std::uint32_t kDefaultRange = 255;

// Reconstructed W x H grayscale image, pixel values in [0, range].
struct Frame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t range = kDefaultRange;
  std::uint64_t tick = 0;
  std::vector<std::uint16_t> pixels;

  Frame() = default;
  Frame(std::uint32_t w, std::uint32_t h, std::uint32_t c, std::uint64_t t)
      : width(w), height(h), range(c), tick(t), pixels(std::size_t{w} * h, 0) {}

  std::uint16_t at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * width + x]; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Round half up, then clamp to [0, range].
std::uint16_t quantize(double value, std::uint32_t range);

// P = C / ISI of the latest completed interval at or before t; 0 before the
// second spike.
Frame tfi_frame(const SpikeIndex& index, std::uint64_t t, std::uint32_t range = kDefaultRange);
Frame tfi_frame(const SpikeStream& stream, std::uint64_t t, std::uint32_t range = kDefaultRange);

// P = C * N_w / w where N_w counts spikes in (t - w, t].
Frame tfp_frame(const SpikeIndex& index, std::uint64_t t, std::uint64_t window,
                std::uint32_t range = kDefaultRange);
Frame tfp_frame(const SpikeStream& stream, std::uint64_t t, std::uint64_t window,
                std::uint32_t range = kDefaultRange);

// Streaming TFI: tracks the last two spike ticks of every pixel while planes
// are ingested in order.
class TfiDecoder {
 public:
  TfiDecoder(std::uint32_t width, std::uint32_t height);

  void ingest(std::span<const std::uint8_t> plane);
  // Frame as of the last ingested tick.
  Frame frame(std::uint32_t range = kDefaultRange) const;
  std::uint64_t ticks_ingested() const { return next_tick_; }

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::uint64_t next_tick_ = 0;
  // 0 means "no spike yet"; otherwise tick + 1.
  std::vector<std::uint32_t> last_;
  std::vector<std::uint32_t> prev_;
};

// Streaming TFP: sliding spike counts over the last `window` ingested planes.
class TfpDecoder {
 public:
  TfpDecoder(std::uint32_t width, std::uint32_t height, std::uint64_t window);

  void ingest(std::span<const std::uint8_t> plane);
  Frame frame(std::uint32_t range = kDefaultRange) const;
  std::uint64_t ticks_ingested() const { return next_tick_; }

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::uint64_t window_;
  std::uint64_t next_tick_ = 0;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint8_t> ring_;  // last `window` planes
};

struct TfaConfig {
  double tau = 8.0;        // kernel time constant, ticks
  double delay = 0.0;      // kernel delay, ticks
  std::uint32_t window = 256;  // T: spike-count window, ticks
  double theta0 = 1.0;     // initial threshold
  std::uint32_t horizon = 0;   // K: kernel truncation, ticks; 0 derives it from tau and delay
  // n in the threshold update counts the model's own firings over the last T
  // ticks; false counts input spikes instead.
  bool count_output_spikes = true;

  static constexpr double kThresholdFloor = 1e-6;
  static constexpr double kKernelCutoff = 1e-4;

  void validate() const;
  // `horizon` if set, otherwise the first tick offset past the kernel peak
  // where the kernel drops below kKernelCutoff.
  std::uint32_t effective_horizon() const;
};

// Spike-response kernel ((d - delay) / tau) * exp(1 - (d - delay) / tau) with
// d = t - s; zero for d < delay and for d > horizon.
double srm_kernel(std::int64_t t, std::int64_t s, const TfaConfig& config);

// Per-pixel adaptive-threshold neuron state driven by a spike stream.
class TfaState {
 public:
  TfaState(std::uint32_t width, std::uint32_t height, const TfaConfig& config);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  const TfaConfig& config() const { return config_; }
  // Number of ticks processed so far.
  std::uint64_t tick() const { return tick_; }

  std::span<const double> thresholds() const { return threshold_; }
  std::span<const double> potentials() const { return potential_; }
  // Spikes counted toward the threshold update, per pixel, over the last T ticks.
  std::span<const std::uint32_t> window_counts() const { return window_count_; }
  // Whether each pixel's model fired on the last processed tick.
  const BitPlane& last_output() const { return last_output_; }

 private:
  friend void tfa_step(TfaState& state, std::span<const std::uint8_t> plane);

  void step(std::span<const std::uint8_t> plane);

  std::uint32_t width_;
  std::uint32_t height_;
  TfaConfig config_;
  std::uint32_t horizon_;
  std::vector<double> kernel_;  // kernel_[d] for d in [0, horizon]
  std::uint64_t tick_ = 0;

  std::vector<double> potential_;
  std::vector<double> threshold_;
  std::vector<std::uint32_t> window_count_;
  // Ring of the last T counted planes (input or output spikes).
  std::vector<std::uint8_t> history_;
  // Per-pixel ring of input-spike ticks since the last model firing, at most
  // horizon + 1 entries each.
  std::vector<std::uint32_t> recent_;
  std::vector<std::uint16_t> recent_head_;
  std::vector<std::uint16_t> recent_size_;
  BitPlane last_output_;
};

void tfa_step(TfaState& state, std::span<const std::uint8_t> plane);
inline void tfa_step(TfaState& state, const BitPlane& plane) { tfa_step(state, plane.bytes()); }

// Min-max normalizes the threshold matrix to [0, range]; uniform thresholds
// give an all-zero frame.
Frame tfa_texture(const TfaState& state, std::uint32_t range = kDefaultRange);

// Runs a fresh TfaState over ticks [0, t] and returns the texture at t.
Frame tfa_frame(const SpikeStream& stream, std::uint64_t t, const TfaConfig& config,
                std::uint32_t range = kDefaultRange);

}  // namespace spikecam
