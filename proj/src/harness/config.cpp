#include "harness/config.hpp"

#include <fstream>

#include <json.hpp>

#include "common/errors.hpp"

namespace goblend::harness {

using nlohmann::json;

namespace {

json driver_to_json(const traces::DriverProfile& d) {
    return json{{"speed_fraction", d.speed_fraction}, {"lookahead_gain", d.lookahead_gain},
                {"steer_noise", d.steer_noise},       {"blunder_prob", d.blunder_prob},
                {"blunder_windows", d.blunder_windows}, {"wander_amp", d.wander_amp}};
}

traces::DriverProfile driver_from_json(const json& j, traces::DriverProfile base) {
    base.speed_fraction = j.value("speed_fraction", base.speed_fraction);
    base.lookahead_gain = j.value("lookahead_gain", base.lookahead_gain);
    base.steer_noise = j.value("steer_noise", base.steer_noise);
    base.blunder_prob = j.value("blunder_prob", base.blunder_prob);
    base.blunder_windows = j.value("blunder_windows", base.blunder_windows);
    base.wander_amp = j.value("wander_amp", base.wander_amp);
    return base;
}

json annotator_to_json(const traces::AnnotatorProfile& a) {
    return json{{"gain", a.gain},           {"bias", a.bias},
                {"smoothing_s", a.smoothing_s}, {"noise_amp", a.noise_amp},
                {"drift_rate", a.drift_rate},   {"w_speed", a.w_speed},
                {"w_proximity", a.w_proximity}, {"crash_gain", a.crash_gain},
                {"crash_decay", a.crash_decay}};
}

traces::AnnotatorProfile annotator_from_json(const json& j, traces::AnnotatorProfile base) {
    base.gain = j.value("gain", base.gain);
    base.bias = j.value("bias", base.bias);
    base.smoothing_s = j.value("smoothing_s", base.smoothing_s);
    base.noise_amp = j.value("noise_amp", base.noise_amp);
    base.drift_rate = j.value("drift_rate", base.drift_rate);
    base.w_speed = j.value("w_speed", base.w_speed);
    base.w_proximity = j.value("w_proximity", base.w_proximity);
    base.crash_gain = j.value("crash_gain", base.crash_gain);
    base.crash_decay = j.value("crash_decay", base.crash_decay);
    return base;
}

const std::array<traces::SkillTier, 4> kTiers = {
    traces::SkillTier::Expert, traces::SkillTier::Advanced, traces::SkillTier::Intermediate,
    traces::SkillTier::Beginner};

}  // namespace

racing::TrackLayout Config::load_track() const {
    return track_path.empty() ? racing::default_track() : racing::load_track(track_path);
}

Config default_config() { return Config{}; }

std::string config_to_json(const Config& c) {
    json j;
    j["track"]["path"] = c.track_path;
    j["generator"]["base_seed"] = c.generator.base_seed;
    for (auto tier : kTiers) {
        const char* name = traces::tier_name(tier);
        j["generator"]["cohort"][name] = c.generator.cohort_sizes.at(tier);
        j["generator"]["drivers"][name] = driver_to_json(c.generator.drivers.at(tier));
        j["generator"]["annotators"][name] = annotator_to_json(c.generator.annotators.at(tier));
    }
    j["cluster"]["cut_threshold"] = c.cluster_cut_threshold;
    j["affect"]["k"] = c.knn_k;
    j["affect"]["weighting"] = affect::weighting_name(c.knn_weighting);
    j["exploration"]["iterations"] = c.iterations;
    j["exploration"]["actions_per_iteration"] = c.actions_per_iteration;
    j["exploration"]["seeds"] = c.seeds;
    j["exploration"]["lambdas"] = c.lambdas;
    j["exploration"]["replay_check_fraction"] = c.replay_check_fraction;
    j["exploration"]["workers"] = c.workers;
    j["exploration"]["progress_every"] = c.progress_every;
    j["exploration"]["parallel_runs"] = c.parallel_runs;
    return j.dump(2) + "\n";
}

void save_config(const Config& config, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open config for writing: " + path);
    f << config_to_json(config);
    if (!f) throw IoError("failed writing config: " + path);
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }

    Config c;
    if (j.contains("track")) c.track_path = j["track"].value("path", c.track_path);
    if (j.contains("generator")) {
        const auto& g = j["generator"];
        c.generator.base_seed = g.value("base_seed", c.generator.base_seed);
        for (auto tier : kTiers) {
            const char* name = traces::tier_name(tier);
            if (g.contains("cohort") && g["cohort"].contains(name)) {
                c.generator.cohort_sizes[tier] = g["cohort"][name].get<int>();
            }
            if (g.contains("drivers") && g["drivers"].contains(name)) {
                c.generator.drivers[tier] =
                    driver_from_json(g["drivers"][name], c.generator.drivers[tier]);
            }
            if (g.contains("annotators") && g["annotators"].contains(name)) {
                c.generator.annotators[tier] =
                    annotator_from_json(g["annotators"][name], c.generator.annotators[tier]);
            }
        }
    }
    if (j.contains("cluster")) {
        c.cluster_cut_threshold = j["cluster"].value("cut_threshold", c.cluster_cut_threshold);
    }
    if (j.contains("affect")) {
        c.knn_k = j["affect"].value("k", c.knn_k);
        if (j["affect"].contains("weighting")) {
            c.knn_weighting =
                affect::weighting_from_name(j["affect"]["weighting"].get<std::string>());
        }
    }
    if (j.contains("exploration")) {
        const auto& e = j["exploration"];
        c.iterations = e.value("iterations", c.iterations);
        c.actions_per_iteration = e.value("actions_per_iteration", c.actions_per_iteration);
        if (e.contains("seeds")) c.seeds = e["seeds"].get<std::vector<std::uint64_t>>();
        if (e.contains("lambdas")) c.lambdas = e["lambdas"].get<std::vector<double>>();
        c.replay_check_fraction = e.value("replay_check_fraction", c.replay_check_fraction);
        c.workers = e.value("workers", c.workers);
        c.progress_every = e.value("progress_every", c.progress_every);
        c.parallel_runs = e.value("parallel_runs", c.parallel_runs);
    }
    return c;
}

}  // namespace goblend::harness
