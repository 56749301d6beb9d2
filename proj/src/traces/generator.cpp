#include "traces/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace goblend::traces {

using racing::Action;
using racing::GameState;
using racing::TrackLayout;
using racing::TrackPoint;

GeneratorConfig GeneratorConfig::defaults() {
    GeneratorConfig c;
    c.drivers[SkillTier::Expert] = {0.94, 0.85, 0.010, 0.000, 0, 0.3};
    c.drivers[SkillTier::Advanced] = {0.84, 0.80, 0.030, 0.002, 3, 0.8};
    c.drivers[SkillTier::Intermediate] = {0.72, 0.70, 0.060, 0.006, 4, 1.6};
    c.drivers[SkillTier::Beginner] = {0.58, 0.60, 0.110, 0.014, 6, 2.6};

    c.annotators[SkillTier::Expert] = {1.0, 0.10, 1.2, 0.050, 0.0004, 0.65, 0.30, 1.2, 0.75};
    c.annotators[SkillTier::Advanced] = {1.0, 0.12, 1.4, 0.060, 0.0006, 0.55, 0.35, 1.4, 0.75};
    c.annotators[SkillTier::Intermediate] = {1.0, 0.15, 1.6, 0.075, 0.0008, 0.45, 0.40, 1.6, 0.75};
    c.annotators[SkillTier::Beginner] = {1.0, 0.18, 1.8, 0.090, 0.0010, 0.35, 0.40, 1.8, 0.75};

    c.cohort_sizes[SkillTier::Expert] = 27;
    c.cohort_sizes[SkillTier::Advanced] = 32;
    c.cohort_sizes[SkillTier::Intermediate] = 19;
    c.cohort_sizes[SkillTier::Beginner] = 30;
    return c;
}

namespace {

// Corner-limited safe speed over a lookahead span of centerline.
double safe_speed_ahead(const TrackLayout& layout, double arc_s, double lookahead) {
    double min_speed = racing::kMaxSpeed;
    const int probes = 6;
    for (int i = 1; i <= probes; ++i) {
        const double s0 = arc_s + lookahead * i / probes;
        const double h0 = layout.tangent_heading_at(s0);
        const double h1 = layout.tangent_heading_at(s0 + 4.0);
        const double curvature = std::abs(wrap_angle(h1 - h0)) / 4.0;
        if (curvature > 1e-4) {
            min_speed = std::min(min_speed, std::sqrt(racing::kMaxLateralAccel / curvature));
        }
    }
    return min_speed;
}

Action drive_window(const TrackLayout& layout, const GameState& st, const DriverProfile& prof,
                    Rng& rng, int& blunder_left, int& blunder_steer, double wander_phase) {
    const TrackPoint tp = layout.project(st.player.pos);

    // Steering: aim at a point ahead on the centerline, offset by the
    // tier's wander wobble.
    const double lookahead = std::max(6.0, st.player.speed * prof.lookahead_gain);
    const double aim_s = tp.arc_s + lookahead;
    const double wobble = prof.wander_amp * std::sin(aim_s * 0.05 + wander_phase);
    const Vec2 aim = layout.point_at(aim_s) +
                     left_normal(unit_from_angle(layout.tangent_heading_at(aim_s))) * wobble;
    const Vec2 to_aim = aim - st.player.pos;
    const double desired = std::atan2(to_aim.y, to_aim.x);
    const double err = wrap_angle(desired - st.player.heading);

    int steer = 0;
    if (err > 0.05) steer = 1;
    else if (err < -0.05) steer = -1;

    if (blunder_left > 0) {
        steer = blunder_steer;
        --blunder_left;
    } else if (rng.unit() < prof.blunder_prob) {
        blunder_left = prof.blunder_windows;
        blunder_steer = rng.unit() < 0.5 ? -1 : 1;
        steer = blunder_steer;
    } else if (rng.unit() < prof.steer_noise) {
        steer = static_cast<int>(rng.index(3)) - 1;
    }

    // Throttle: bang-bang around the corner-limited target speed.
    const double braking_span = std::max(15.0, st.player.speed * st.player.speed /
                                                   (2.0 * racing::kBrakeAccel * 0.8));
    const double target = prof.speed_fraction *
                          std::min(racing::kMaxSpeed, safe_speed_ahead(layout, tp.arc_s, braking_span));
    int gas = 0;
    if (st.player.speed < target * 0.97) gas = 1;
    else if (st.player.speed > target * 1.06) gas = -1;

    return {steer, gas};
}

}  // namespace

std::vector<double> annotate_arousal(const PlaySession& session, const AnnotatorProfile& profile,
                                     std::uint64_t seed) {
    if (session.windows.empty()) throw ValidationError("cannot annotate an empty session");
    if (!(profile.smoothing_s > 0.0)) throw ValidationError("smoothing constant must be > 0");
    if (profile.noise_amp < 0.0) throw ValidationError("noise amplitude must be >= 0");

    Rng rng(splitmix64(seed ^ 0xA40u));
    const double alpha = racing::kWindowSeconds / (profile.smoothing_s + racing::kWindowSeconds);

    std::vector<double> out;
    out.reserve(session.windows.size());
    double smoothed = 0.0;
    double impulse = 0.0;
    bool first = true;
    for (std::size_t w = 0; w < session.windows.size(); ++w) {
        const auto& f = session.windows[w].features;
        impulse *= profile.crash_decay;
        if (f[racing::kFeatCrashed] > 0.5) impulse += profile.crash_gain;
        const double proximity =
            std::max(0.0, 1.0 - f[racing::kFeatNearestOppDist] / 120.0);
        const double stimulus = profile.w_speed * (f[racing::kFeatSpeed] / racing::kMaxSpeed) +
                                profile.w_proximity * proximity + impulse;
        smoothed = first ? stimulus : smoothed + alpha * (stimulus - smoothed);
        first = false;
        const double t = static_cast<double>(w) * racing::kWindowSeconds;
        out.push_back(profile.gain * smoothed + profile.bias + profile.drift_rate * t +
                      profile.noise_amp * rng.gaussian());
    }
    return out;
}

PlaySession generate_session(const TrackLayout& layout, SkillTier tier, std::uint64_t seed,
                             const GeneratorConfig& config) {
    const auto dit = config.drivers.find(tier);
    const auto ait = config.annotators.find(tier);
    if (dit == config.drivers.end() || ait == config.annotators.end()) {
        throw ValidationError("generator config missing tier profile");
    }
    const DriverProfile& prof = dit->second;

    Rng rng(splitmix64(seed));
    const double wander_phase = rng.unit() * 2.0 * kPi;

    PlaySession session;
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%llu", tier_name(tier),
                  static_cast<unsigned long long>(seed));
    session.session_id = id;
    session.tier_hint = tier;
    session.seed = seed;

    GameState st = racing::reset(layout, seed);
    int blunder_left = 0;
    int blunder_steer = 0;
    while (!st.finished) {
        const Action a = drive_window(layout, st, prof, rng, blunder_left, blunder_steer,
                                      wander_phase);
        st = racing::step(layout, st, a);
        session.windows.push_back({racing::features(layout, st), a});
    }
    session.arousal = normalize_trace(annotate_arousal(session, ait->second, seed));
    return session;
}

Dataset generate_cohort(const TrackLayout& layout, const GeneratorConfig& config) {
    Dataset out;
    std::uint64_t next_seed = config.base_seed;
    for (SkillTier tier : {SkillTier::Expert, SkillTier::Advanced, SkillTier::Intermediate,
                           SkillTier::Beginner}) {
        const auto it = config.cohort_sizes.find(tier);
        const int n = it == config.cohort_sizes.end() ? 0 : it->second;
        for (int i = 0; i < n; ++i) {
            out.push_back(generate_session(layout, tier, next_seed++, config));
        }
    }
    return out;
}

}  // namespace goblend::traces
