#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "spikecam/reconstruct.hpp"
#include "spikecam/stream_codec.hpp"
#include "spikecam/types.hpp"

namespace spikecam {

struct EventConfig {
  double theta = 0.3;  // contrast threshold on ln(ISI), nats

  void validate() const;
};

// DVS-style conversion. Per pixel, the first completed ISI becomes the
// reference; a later ISI whose log differs from the reference by at least
// theta emits an event at its closing spike and becomes the new reference.
// A shorter ISI means brighter, so it maps to On. Sorted by (tick, y, x).
std::vector<Event> spikes_to_events(const SpikeIndex& index, const EventConfig& config);
std::vector<Event> spikes_to_events(const SpikeStream& stream, const EventConfig& config);

// CSV with header "tick,x,y,polarity"; polarity is 1 (On) or -1 (Off).
void write_events_csv(std::ostream& out, std::span<const Event> events);

inline constexpr std::uint16_t kEventOnLevel = 255;
inline constexpr std::uint16_t kEventOffLevel = 0;
inline constexpr std::uint16_t kEventBackgroundLevel = 128;

// Renders events with tick in [first_tick, last_tick] on a gray background:
// On white, Off black. Later events overwrite earlier ones at a pixel.
Frame render_events(std::span<const Event> events, std::uint32_t width, std::uint32_t height,
                    std::uint64_t first_tick, std::uint64_t last_tick);

}  // namespace spikecam
