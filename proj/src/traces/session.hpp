#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "racing/sim.hpp"

namespace goblend::traces {

enum class SkillTier { Beginner = 0, Intermediate = 1, Advanced = 2, Expert = 3 };
inline constexpr int kTierCount = 4;

const char* tier_name(SkillTier t);
SkillTier tier_from_name(std::string_view name);

struct SessionWindow {
    racing::FeatureVector features{};
    racing::Action action;
    bool operator==(const SessionWindow&) const = default;
};

struct PlaySession {
    std::string session_id;
    std::optional<SkillTier> tier_hint;   // synthetic ground truth, if known
    std::vector<SessionWindow> windows;
    std::vector<double> arousal;          // per window, [0,1] once normalized
    std::uint64_t seed = 0;
    int generator_version = 1;

    bool operator==(const PlaySession&) const = default;

    int final_score() const {
        return windows.empty()
                   ? 0
                   : static_cast<int>(windows.back().features[racing::kFeatScore]);
    }
};

using Dataset = std::vector<PlaySession>;

// Min-max scaling to [0,1] per session; a constant trace maps to all 0.5.
std::vector<double> normalize_trace(const std::vector<double>& trace);

// Drops every window after the one that completes `laps` laps. The arousal
// trace is cut in lockstep.
PlaySession truncate_to_laps(const PlaySession& session, int laps = 2);

// Normalized frequency of the 9 (steer, gas) combinations over the dataset.
std::array<double, racing::kActionCount> action_frequency_table(const Dataset& dataset);

void save_sessions(const Dataset& dataset, const std::string& path);
Dataset load_sessions(const std::string& path);

}  // namespace goblend::traces
