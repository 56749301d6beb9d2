#pragma once

#include <string>
#include <vector>

#include "racing/sim.hpp"

namespace goblend::harness {

// Track map with the trajectory drawn as a polyline and one waypoint marker
// per window, colored blue (lowest arousal) to red (highest).
std::string render_trace_svg(const racing::TrackLayout& layout,
                             const std::vector<Vec2>& positions,
                             const std::vector<double>& arousal);

// Replays the action log to window positions, then renders.
std::string render_trajectory_svg(const racing::TrackLayout& layout, std::uint64_t seed,
                                  const std::vector<racing::Action>& actions,
                                  const std::vector<double>& arousal);

void write_text_file(const std::string& content, const std::string& path);

}  // namespace goblend::harness
