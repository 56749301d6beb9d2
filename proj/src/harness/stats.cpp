#include "harness/stats.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "common/errors.hpp"
#include "explore/reward.hpp"

namespace goblend::harness {

InGameStatistics compute_stats(const racing::TrackLayout& layout, std::uint64_t seed,
                               const std::vector<racing::Action>& actions) {
    if (actions.empty()) throw ContractError("cannot compute statistics for an empty trajectory");

    InGameStatistics s;
    racing::GameState st = racing::reset(layout, seed);
    double speed_sum = 0.0, nearest_sum = 0.0;
    int off_road = 0, crashes = 0;
    for (const auto& a : actions) {
        st = racing::step(layout, st, a);
        const auto f = racing::features(layout, st);
        speed_sum += f[racing::kFeatSpeed];
        nearest_sum += f[racing::kFeatNearestOppDist];
        if (f[racing::kFeatOnGrass] > 0.5) ++off_road;
        if (f[racing::kFeatCrashed] > 0.5) ++crashes;
        if (!s.lap1_time_s && st.score >= racing::kCheckpointsPerLap) {
            s.lap1_time_s = st.elapsed_s;
        }
    }
    const double n = static_cast<double>(actions.size());
    s.final_score = st.score;
    s.average_speed = speed_sum / n;
    s.mean_nearest_opponent = nearest_sum / n;
    s.off_road_pct = 100.0 * off_road / n;
    s.crash_pct = 100.0 * crashes / n;
    s.trace_length = static_cast<int>(actions.size());
    return s;
}

RewardPair compare_rewards(const racing::TrackLayout& layout, std::uint64_t seed,
                           const std::vector<racing::Action>& actions,
                           const personas::PersonaModel& persona,
                           const affect::AffectIndex& index) {
    if (actions.empty()) throw ContractError("cannot evaluate rewards for an empty trajectory");
    std::vector<double> hb, he;
    hb.reserve(actions.size());
    he.reserve(actions.size());
    racing::GameState st = racing::reset(layout, seed);
    for (const auto& a : actions) {
        st = racing::step(layout, st, a);
        hb.push_back(static_cast<double>(st.score) / racing::kMaxScore);
        he.push_back(index.estimate(racing::features(layout, st)));
    }
    RewardPair out;
    out.r_behavior = explore::trace_similarity(hb, persona.target_score);
    out.r_experience = explore::trace_similarity(he, persona.target_arousal);
    return out;
}

double student_t_quantile(int df, double p) {
    if (df < 1) throw ValidationError("student t quantile needs df >= 1");
    boost::math::students_t dist(static_cast<double>(df));
    return boost::math::quantile(dist, p);
}

MeanCi mean_ci(const std::vector<double>& values, double confidence) {
    if (values.empty()) throw ValidationError("mean_ci needs at least one value");
    MeanCi out;
    const double n = static_cast<double>(values.size());
    for (double v : values) out.mean += v;
    out.mean /= n;
    if (values.size() < 2) return out;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - out.mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    const double t = student_t_quantile(static_cast<int>(values.size()) - 1,
                                        0.5 + confidence / 2.0);
    out.ci = t * sd / std::sqrt(n);
    return out;
}

}  // namespace goblend::harness
