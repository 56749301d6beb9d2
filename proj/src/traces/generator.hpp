#pragma once

#include <cstdint>
#include <map>

#include "traces/session.hpp"

namespace goblend::traces {

// Scripted driver knobs; one profile per skill tier.
struct DriverProfile {
    double speed_fraction = 0.9;   // of the corner-limited safe speed
    double lookahead_gain = 0.8;   // seconds of travel to the steering aim point
    double steer_noise = 0.02;     // chance per window of a random steer override
    double blunder_prob = 0.0;     // chance per window of starting a forced mis-steer
    int blunder_windows = 0;       // duration of a blunder
    double wander_amp = 0.5;       // racing-line wobble amplitude, meters
};

// Synthetic annotator process; arousal is re-normalized per session afterward.
struct AnnotatorProfile {
    double gain = 1.0;
    double bias = 0.0;
    double smoothing_s = 1.0;      // EMA time constant, > 0
    double noise_amp = 0.05;       // gaussian, per window
    double drift_rate = 0.0;       // per second
    // Stimulus mix.
    double w_speed = 0.6;
    double w_proximity = 0.35;
    double crash_gain = 1.5;       // impulse added on a crash window
    double crash_decay = 0.75;     // impulse retention per window
};

struct GeneratorConfig {
    std::map<SkillTier, DriverProfile> drivers;
    std::map<SkillTier, AnnotatorProfile> annotators;
    std::map<SkillTier, int> cohort_sizes;   // sessions per tier
    std::uint64_t base_seed = 9000;

    static GeneratorConfig defaults();
};

// Plays one full session (two laps or timeout) with the tier's scripted
// driver and attaches a normalized arousal trace.
PlaySession generate_session(const racing::TrackLayout& layout, SkillTier tier,
                             std::uint64_t seed, const GeneratorConfig& config);

// Raw (unnormalized) arousal trace for an existing session.
std::vector<double> annotate_arousal(const PlaySession& session, const AnnotatorProfile& profile,
                                     std::uint64_t seed);

// Full cohort in a deterministic order: tier by tier, seeds base_seed + i.
Dataset generate_cohort(const racing::TrackLayout& layout, const GeneratorConfig& config);

}  // namespace goblend::traces
