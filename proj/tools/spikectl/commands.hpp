#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spikecam/reconstruct.hpp"

namespace spikectl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline constexpr double kDefaultGamma = 2.2;

// Runs one spikectl invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// P -> round(C * (P / C)^(1 / gamma)); gamma == 0 leaves the frame untouched.
void gamma_correct(spikecam::Frame& frame, double gamma);

// frame_0004096.pgm
std::string frame_filename(std::uint64_t tick, const std::string& prefix = "frame_");

}  // namespace spikectl
