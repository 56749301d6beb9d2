#pragma once

#include <cstddef>
#include <vector>

namespace goblend::explore {

// One term of the trace-similarity reward: (1 - |h - t|)^2.
// Kept out-of-line so the incremental and replay paths share one definition.
double similarity_term(double h, double t);

// Target value at window i; targets are held at their final value beyond
// the end of the target trace.
double target_at(const std::vector<double>& target, std::size_t i);

// Mean of similarity_term over the agent trace against the target trace:
// the average squared closeness of the two signals, in [0,1].
// Throws on an empty trace or values outside [0,1].
double trace_similarity(const std::vector<double>& agent, const std::vector<double>& target);

// lambda * r_experience + (1 - lambda) * r_behavior.
double blend(double r_experience, double r_behavior, double lambda);

// Two rewards within this tolerance count as equal for archive replacement.
inline constexpr double kRewardEqualTol = 1e-12;

}  // namespace goblend::explore
