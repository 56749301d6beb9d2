#pragma once

#include <array>
#include <vector>

#include "traces/session.hpp"

namespace goblend::personas {

// One row per session: the summary used for clustering.
inline constexpr int kAggregateDim = 9;
using AggregateVector = std::array<double, kAggregateDim>;

enum AggregateField : int {
    kAggMaxScore = 0,
    kAggMeanSpeed,
    kAggMeanAbsLateral,
    kAggMeanAbsHeadingError,
    kAggMeanAbsSpeedDelta,
    kAggMeanNearestOpp,
    kAggOffRoadCount,
    kAggCrashCount,
    kAggLength,
};

AggregateVector aggregate(const traces::PlaySession& session);

// Column-wise z-scores across the dataset; constant columns map to zero.
std::vector<AggregateVector> standardize(const std::vector<AggregateVector>& rows);

// Adjusted Rand index between two label assignments of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace goblend::personas
