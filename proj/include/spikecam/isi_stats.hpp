#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>

#include "spikecam/scene_forge.hpp"
#include "spikecam/stream_codec.hpp"

namespace spikecam {

// ISI (ticks) -> number of occurrences.
using IsiHistogram = std::map<std::uint64_t, std::uint64_t>;

// Pools every completed ISI of the pixels inside `region`.
IsiHistogram isi_histogram(const SpikeIndex& index, const Rect& region);

// Two-cluster split of an ISI histogram at the valley between its two
// tallest local maxima. ISIs <= threshold form the short (bright) cluster.
struct IsiSplit {
  std::uint64_t short_peak = 0;
  std::uint64_t long_peak = 0;
  std::uint64_t threshold = 0;
  std::uint64_t valley_count = 0;
  std::uint64_t short_count = 0;
  std::uint64_t long_count = 0;
  double short_mean = 0.0;
  double long_mean = 0.0;
  // Valley holds fewer than half the samples of the smaller peak.
  bool bimodal = false;
};

// Empty when the histogram has fewer than two local maxima.
std::optional<IsiSplit> split_isi_histogram(const IsiHistogram& histogram);

// CSV with header "isi,count".
void write_histogram_csv(std::ostream& out, const IsiHistogram& histogram);

}  // namespace spikecam
