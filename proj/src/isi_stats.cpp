#include "spikecam/isi_stats.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace spikecam {

IsiHistogram isi_histogram(const SpikeIndex& index, const Rect& region) {
  if (region.width == 0 || region.height == 0 ||
      std::uint64_t{region.x} + region.width > index.width() ||
      std::uint64_t{region.y} + region.height > index.height()) {
    throw std::out_of_range("stats: region outside the stream");
  }
  IsiHistogram hist;
  for (std::uint32_t y = region.y; y < region.y + region.height; ++y) {
    for (std::uint32_t x = region.x; x < region.x + region.width; ++x) {
      const auto train = index.spikes(x, y);
      for (std::size_t i = 1; i < train.size(); ++i) ++hist[train[i] - train[i - 1]];
    }
  }
  return hist;
}

std::optional<IsiSplit> split_isi_histogram(const IsiHistogram& histogram) {
  if (histogram.empty()) return std::nullopt;
  const std::uint64_t lo = histogram.begin()->first;
  const std::uint64_t hi = histogram.rbegin()->first;
  std::vector<std::uint64_t> dense(hi - lo + 1, 0);
  for (const auto& [isi, n] : histogram) dense[isi - lo] = n;

  // Local maxima, plateaus reduced to their first bin.
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] == 0) continue;
    const std::uint64_t left = i > 0 ? dense[i - 1] : 0;
    std::size_t j = i;
    while (j + 1 < dense.size() && dense[j + 1] == dense[i]) ++j;
    const std::uint64_t right = j + 1 < dense.size() ? dense[j + 1] : 0;
    if (dense[i] > left && dense[i] > right) peaks.push_back(i);
    i = j;
  }
  if (peaks.size() < 2) return std::nullopt;
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) {
    return dense[a] != dense[b] ? dense[a] > dense[b] : a < b;
  });
  const std::size_t a = std::min(peaks[0], peaks[1]);
  const std::size_t b = std::max(peaks[0], peaks[1]);

  // Adjacent peaks leave no valley bin; split right after the short peak.
  std::size_t valley = b == a + 1 ? a : a + 1;
  for (std::size_t i = a + 1; i < b; ++i) {
    if (dense[i] < dense[valley]) valley = i;
  }

  IsiSplit split;
  split.short_peak = lo + a;
  split.long_peak = lo + b;
  split.threshold = lo + valley;
  split.valley_count = dense[valley];
  double short_sum = 0.0;
  double long_sum = 0.0;
  for (const auto& [isi, n] : histogram) {
    if (isi <= split.threshold) {
      split.short_count += n;
      short_sum += static_cast<double>(isi) * n;
    } else {
      split.long_count += n;
      long_sum += static_cast<double>(isi) * n;
    }
  }
  if (split.short_count) split.short_mean = short_sum / split.short_count;
  if (split.long_count) split.long_mean = long_sum / split.long_count;
  split.bimodal = 2 * split.valley_count < std::min(dense[a], dense[b]);
  return split;
}

void write_histogram_csv(std::ostream& out, const IsiHistogram& histogram) {
  out << "isi,count\n";
  for (const auto& [isi, n] : histogram) out << isi << ',' << n << '\n';
}

}  // namespace spikecam
