#include "affect/knn.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "common/errors.hpp"

namespace goblend::affect {

const char* weighting_name(Weighting w) {
    switch (w) {
        case Weighting::Dudani: return "dudani";
        case Weighting::InverseDistance: return "inverse-distance";
        case Weighting::LiteralProse: return "literal-prose";
    }
    return "dudani";
}

Weighting weighting_from_name(std::string_view name) {
    if (name == "dudani") return Weighting::Dudani;
    if (name == "inverse-distance") return Weighting::InverseDistance;
    if (name == "literal-prose") return Weighting::LiteralProse;
    throw ParseError("unknown weighting scheme '" + std::string(name) + "'");
}

AffectIndex::AffectIndex(const traces::Dataset& dataset, const personas::PersonaModel& persona,
                         int k, Weighting weighting)
    : k_(k), weighting_(weighting) {
    if (k < 1) throw ValidationError("k must be >= 1");

    std::unordered_set<std::string> members(persona.member_ids.begin(), persona.member_ids.end());
    std::vector<const traces::PlaySession*> sessions;
    for (const auto& s : dataset) {
        if (members.count(s.session_id)) sessions.push_back(&s);
    }

    std::size_t total = 0;
    for (const auto* s : sessions) total += s->windows.size();
    if (total < static_cast<std::size_t>(k)) {
        throw ValidationError("persona '" + persona.label + "' has fewer windows than k");
    }

    // Column statistics over the raw member rows.
    std::array<double, racing::kFeatureCount> sum{}, sumsq{};
    for (const auto* s : sessions) {
        for (const auto& w : s->windows) {
            for (int c = 0; c < racing::kFeatureCount; ++c) {
                sum[c] += w.features[c];
                sumsq[c] += w.features[c] * w.features[c];
            }
        }
    }
    const double n = static_cast<double>(total);
    for (int c = 0; c < racing::kFeatureCount; ++c) {
        mean_[c] = sum[c] / n;
        const double var = std::max(0.0, sumsq[c] / n - mean_[c] * mean_[c]);
        const double sd = std::sqrt(var);
        inv_sd_[c] = sd > 0.0 ? 1.0 / sd : 0.0;  // constant columns contribute nothing
    }

    rows_.reserve(total * racing::kFeatureCount);
    arousal_.reserve(total);
    for (const auto* s : sessions) {
        for (std::size_t w = 0; w < s->windows.size(); ++w) {
            for (int c = 0; c < racing::kFeatureCount; ++c) {
                rows_.push_back(
                    static_cast<float>((s->windows[w].features[c] - mean_[c]) * inv_sd_[c]));
            }
            arousal_.push_back(s->arousal[w]);
        }
    }
}

std::array<float, racing::kFeatureCount> AffectIndex::standardize(
    const racing::FeatureVector& q) const {
    std::array<float, racing::kFeatureCount> out;
    for (int c = 0; c < racing::kFeatureCount; ++c) {
        if (!std::isfinite(q[c])) throw ValidationError("query feature is not finite");
        out[c] = static_cast<float>((q[c] - mean_[c]) * inv_sd_[c]);
    }
    return out;
}

std::vector<Neighbor> AffectIndex::nearest(const racing::FeatureVector& query) const {
    const auto q = standardize(query);
    const std::size_t n = arousal_.size();
    const std::size_t k = static_cast<std::size_t>(std::min<std::size_t>(k_, n));

    // k-best insertion scan with early abandoning on the partial sum. A row
    // whose final distance ties the current worst is never abandoned
    // (partial sums only grow), so tie handling matches the full sort.
    std::vector<std::pair<double, std::int32_t>> best;  // sorted ascending by (d2, row)
    best.reserve(k + 1);
    const float* row = rows_.data();
    for (std::size_t i = 0; i < n; ++i, row += racing::kFeatureCount) {
        double d2 = 0.0;
        if (best.size() == k) {
            const double worst = best.back().first;
            bool abandoned = false;
            for (int c = 0; c < racing::kFeatureCount; c += 4) {
                for (int j = c; j < std::min(c + 4, racing::kFeatureCount); ++j) {
                    const double d = static_cast<double>(row[j]) - static_cast<double>(q[j]);
                    d2 += d * d;
                }
                if (d2 > worst) {
                    abandoned = true;
                    break;
                }
            }
            if (abandoned) continue;
        } else {
            for (int c = 0; c < racing::kFeatureCount; ++c) {
                const double d = static_cast<double>(row[c]) - static_cast<double>(q[c]);
                d2 += d * d;
            }
        }
        const std::pair<double, std::int32_t> cand{d2, static_cast<std::int32_t>(i)};
        if (best.size() == k && !(cand < best.back())) continue;
        best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
        if (best.size() > k) best.pop_back();
    }

    std::vector<Neighbor> out;
    out.reserve(best.size());
    for (const auto& [d2, idx] : best) out.push_back({std::sqrt(d2), idx});
    return out;
}

std::vector<Neighbor> AffectIndex::nearest_brute_force(const racing::FeatureVector& query) const {
    const auto q = standardize(query);
    const std::size_t n = arousal_.size();
    std::vector<std::pair<double, std::int32_t>> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float* row = rows_.data() + i * racing::kFeatureCount;
        double d2 = 0.0;
        for (int c = 0; c < racing::kFeatureCount; ++c) {
            const double d = static_cast<double>(row[c]) - static_cast<double>(q[c]);
            d2 += d * d;
        }
        all[i] = {d2, static_cast<std::int32_t>(i)};
    }
    std::sort(all.begin(), all.end());
    const std::size_t k = static_cast<std::size_t>(std::min<std::size_t>(k_, n));
    std::vector<Neighbor> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back({std::sqrt(all[i].first), all[i].second});
    return out;
}

double AffectIndex::weighted_mean(const std::vector<Neighbor>& nb) const {
    // Exact matches short-circuit to the mean of the zero-distance rows.
    if (!nb.empty() && nb.front().distance == 0.0) {
        double sum = 0.0;
        int count = 0;
        for (const auto& x : nb) {
            if (x.distance != 0.0) break;
            sum += arousal_[static_cast<std::size_t>(x.row)];
            ++count;
        }
        return sum / count;
    }

    const std::size_t k = nb.size();
    double wsum = 0.0, asum = 0.0;
    switch (weighting_) {
        case Weighting::Dudani: {
            const double d1 = nb.front().distance;
            const double dk = nb.back().distance;
            if (dk == d1) {
                for (const auto& x : nb) asum += arousal_[static_cast<std::size_t>(x.row)];
                return asum / static_cast<double>(k);
            }
            for (const auto& x : nb) {
                const double w = (dk - x.distance) / (dk - d1);
                wsum += w;
                asum += w * arousal_[static_cast<std::size_t>(x.row)];
            }
            break;
        }
        case Weighting::InverseDistance: {
            for (const auto& x : nb) {
                const double w = 1.0 / x.distance;
                wsum += w;
                asum += w * arousal_[static_cast<std::size_t>(x.row)];
            }
            break;
        }
        case Weighting::LiteralProse: {
            // Weight proportional to the raw distance itself.
            for (const auto& x : nb) {
                wsum += x.distance;
                asum += x.distance * arousal_[static_cast<std::size_t>(x.row)];
            }
            break;
        }
    }
    const double v = asum / wsum;
    return std::clamp(v, 0.0, 1.0);
}

double AffectIndex::estimate(const racing::FeatureVector& query) const {
    return weighted_mean(nearest(query));
}

double AffectIndex::estimate_brute_force(const racing::FeatureVector& query) const {
    return weighted_mean(nearest_brute_force(query));
}

}  // namespace goblend::affect
