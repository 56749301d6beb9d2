#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "personas/persona.hpp"
#include "traces/session.hpp"

namespace goblend::affect {

enum class Weighting { Dudani, InverseDistance, LiteralProse };

const char* weighting_name(Weighting w);
Weighting weighting_from_name(std::string_view name);

struct Neighbor {
    double distance = 0.0;
    std::int32_t row = 0;
};

// Immutable kNN index over one persona's windows. Rows are standardized
// column-wise with the index's own statistics, and queries are mapped
// through the same transform. Queries are pure and thread-safe.
class AffectIndex {
public:
    // Rows come from the persona's member sessions only.
    AffectIndex(const traces::Dataset& dataset, const personas::PersonaModel& persona,
                int k, Weighting weighting);

    std::size_t row_count() const { return arousal_.size(); }
    int k() const { return k_; }
    Weighting weighting() const { return weighting_; }

    // Distance-weighted kNN regression; always in [0,1].
    double estimate(const racing::FeatureVector& query) const;

    // Exhaustive-scan oracle: full sort by (distance, row index). Must agree
    // with estimate() exactly.
    double estimate_brute_force(const racing::FeatureVector& query) const;

    // Neighbor sets for the exactness checks.
    std::vector<Neighbor> nearest(const racing::FeatureVector& query) const;
    std::vector<Neighbor> nearest_brute_force(const racing::FeatureVector& query) const;

private:
    std::vector<float> rows_;   // row-major, row_count x kFeatureCount, standardized
    std::vector<double> arousal_;
    std::array<double, racing::kFeatureCount> mean_{};
    std::array<double, racing::kFeatureCount> inv_sd_{};
    int k_ = 5;
    Weighting weighting_ = Weighting::Dudani;

    std::array<float, racing::kFeatureCount> standardize(const racing::FeatureVector& q) const;
    double weighted_mean(const std::vector<Neighbor>& neighbors) const;
};

}  // namespace goblend::affect
