#include "personas/aggregate.hpp"

#include <cmath>
#include <map>

#include "common/errors.hpp"

namespace goblend::personas {

AggregateVector aggregate(const traces::PlaySession& session) {
    if (session.windows.empty()) throw ValidationError("cannot aggregate an empty session");
    AggregateVector v{};
    const double n = static_cast<double>(session.windows.size());
    for (const auto& w : session.windows) {
        const auto& f = w.features;
        v[kAggMaxScore] = std::max(v[kAggMaxScore], f[racing::kFeatScore]);
        v[kAggMeanSpeed] += f[racing::kFeatSpeed];
        v[kAggMeanAbsLateral] += std::abs(f[racing::kFeatLateralOffset]);
        v[kAggMeanAbsHeadingError] += std::abs(f[racing::kFeatHeadingError]);
        v[kAggMeanAbsSpeedDelta] += std::abs(f[racing::kFeatSpeedDelta]);
        v[kAggMeanNearestOpp] += f[racing::kFeatNearestOppDist];
        v[kAggOffRoadCount] += f[racing::kFeatOnGrass] > 0.5 ? 1.0 : 0.0;
        v[kAggCrashCount] += f[racing::kFeatCrashed] > 0.5 ? 1.0 : 0.0;
    }
    v[kAggMeanSpeed] /= n;
    v[kAggMeanAbsLateral] /= n;
    v[kAggMeanAbsHeadingError] /= n;
    v[kAggMeanAbsSpeedDelta] /= n;
    v[kAggMeanNearestOpp] /= n;
    v[kAggLength] = n;
    return v;
}

std::vector<AggregateVector> standardize(const std::vector<AggregateVector>& rows) {
    if (rows.empty()) return {};
    const double n = static_cast<double>(rows.size());
    AggregateVector mean{}, var{};
    for (const auto& r : rows) {
        for (int c = 0; c < kAggregateDim; ++c) mean[c] += r[c];
    }
    for (int c = 0; c < kAggregateDim; ++c) mean[c] /= n;
    for (const auto& r : rows) {
        for (int c = 0; c < kAggregateDim; ++c) {
            const double d = r[c] - mean[c];
            var[c] += d * d;
        }
    }
    std::vector<AggregateVector> out(rows.size());
    for (int c = 0; c < kAggregateDim; ++c) {
        const double sd = std::sqrt(var[c] / n);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out[i][c] = sd > 0.0 ? (rows[i][c] - mean[c]) / sd : 0.0;
        }
    }
    return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw ValidationError("label vectors must be non-empty and equal length");
    }
    std::map<std::pair<int, int>, long long> joint;
    std::map<int, long long> count_a, count_b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        count_a[a[i]] += 1;
        count_b[b[i]] += 1;
    }
    const auto choose2 = [](long long k) { return static_cast<double>(k) * (k - 1) / 2.0; };
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, c] : joint) sum_joint += choose2(c);
    for (const auto& [key, c] : count_a) sum_a += choose2(c);
    for (const auto& [key, c] : count_b) sum_b += choose2(c);
    const double total = choose2(static_cast<long long>(a.size()));
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_joint - expected) / (max_index - expected);
}

}  // namespace goblend::personas
