#include "spikecam/types.hpp"

namespace spikecam {

const char* to_string(ResetMode mode) {
  switch (mode) {
    case ResetMode::Drain:
      return "drain";
    case ResetMode::Subtract:
      return "subtract";
  }
  return "unknown";
}

std::size_t BitPlane::count() const {
  std::size_t n = 0;
  for (auto b : bytes_) n += static_cast<std::size_t>(std::popcount(b));
  return n;
}

}  // namespace spikecam
