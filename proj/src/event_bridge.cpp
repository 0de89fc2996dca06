#include "spikecam/event_bridge.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace spikecam {

void EventConfig::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("events: theta must be positive");
}

std::vector<Event> spikes_to_events(const SpikeIndex& index, const EventConfig& config) {
  config.validate();
  std::vector<Event> events;
  const std::uint32_t w = index.width();
  for (std::uint32_t y = 0; y < index.height(); ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const auto train = index.spikes(std::size_t{y} * w + x);
      if (train.size() < 3) continue;
      double reference = std::log(static_cast<double>(train[1] - train[0]));
      for (std::size_t i = 2; i < train.size(); ++i) {
        const double current = std::log(static_cast<double>(train[i] - train[i - 1]));
        if (std::abs(reference - current) >= config.theta) {
          events.push_back({x, y, train[i], current < reference ? Polarity::On : Polarity::Off});
          reference = current;
        }
      }
    }
  }
  // Pixels were visited in (y, x) order, so a stable sort on tick gives (tick, y, x).
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.tick < b.tick; });
  return events;
}

std::vector<Event> spikes_to_events(const SpikeStream& stream, const EventConfig& config) {
  return spikes_to_events(SpikeIndex(stream), config);
}

void write_events_csv(std::ostream& out, std::span<const Event> events) {
  out << "tick,x,y,polarity\n";
  for (const auto& e : events) {
    out << e.tick << ',' << e.x << ',' << e.y << ',' << static_cast<int>(e.polarity) << '\n';
  }
}

Frame render_events(std::span<const Event> events, std::uint32_t width, std::uint32_t height,
                    std::uint64_t first_tick, std::uint64_t last_tick) {
  Frame frame(width, height, 255, last_tick);
  std::fill(frame.pixels.begin(), frame.pixels.end(), kEventBackgroundLevel);
  for (const auto& e : events) {
    if (e.tick < first_tick || e.tick > last_tick) continue;
    if (e.x >= width || e.y >= height) throw std::out_of_range("events: event outside the frame");
    frame.pixels[std::size_t{e.y} * width + e.x] = e.polarity == Polarity::On ? kEventOnLevel : kEventOffLevel;
  }
  return frame;
}

}  // namespace spikecam
