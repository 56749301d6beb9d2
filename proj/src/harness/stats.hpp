#pragma once

#include <optional>
#include <vector>

#include "explore/explorer.hpp"
#include "racing/sim.hpp"

namespace goblend::harness {

struct InGameStatistics {
    int final_score = 0;
    std::optional<double> lap1_time_s;   // absent when lap 1 was not finished
    double average_speed = 0.0;
    double mean_nearest_opponent = 0.0;  // capped at 500 units
    double off_road_pct = 0.0;
    double crash_pct = 0.0;
    int trace_length = 0;                // windows
};

// Statistics from a fresh deterministic replay of the action log; never
// from cached exploration state. Throws ContractError for an empty log.
InGameStatistics compute_stats(const racing::TrackLayout& layout, std::uint64_t seed,
                               const std::vector<racing::Action>& actions);

// Full-trajectory behavior/experience rewards against a persona, evaluated
// over a fresh replay.
struct RewardPair {
    double r_behavior = 0.0;
    double r_experience = 0.0;
};
RewardPair compare_rewards(const racing::TrackLayout& layout, std::uint64_t seed,
                           const std::vector<racing::Action>& actions,
                           const personas::PersonaModel& persona,
                           const affect::AffectIndex& index);

// mean +/- halfwidth of the two-sided 95% confidence interval
// (Student-t, df = n - 1). Requires n >= 1; the halfwidth is 0 for n == 1.
struct MeanCi {
    double mean = 0.0;
    double ci = 0.0;
};
MeanCi mean_ci(const std::vector<double>& values, double confidence = 0.95);

// Student-t two-sided quantile used for the interval above.
double student_t_quantile(int df, double p);

}  // namespace goblend::harness
