#include "harness/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace goblend::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<double> collect(const ExperimentResult& r, double (*get)(const SeedRun&)) {
    std::vector<double> v;
    v.reserve(r.runs.size());
    for (const auto& run : r.runs) v.push_back(get(run));
    return v;
}

}  // namespace

AggregateRow aggregate_experiment(const ExperimentResult& r) {
    if (r.runs.empty()) throw ValidationError("experiment has no runs: " + r.spec.id);
    AggregateRow row;
    row.experiment = r.spec.id;
    row.persona_label = r.spec.persona_label;
    if (r.spec.kind == ExperimentKind::PersonaLambda) row.lambda = r.spec.lambda;

    row.final_score = mean_ci(collect(r, [](const SeedRun& s) {
        return static_cast<double>(s.stats.final_score);
    }));
    const bool all_lap1 = std::all_of(r.runs.begin(), r.runs.end(), [](const SeedRun& s) {
        return s.stats.lap1_time_s.has_value();
    });
    if (all_lap1) {
        row.lap1_time_s = mean_ci(collect(r, [](const SeedRun& s) { return *s.stats.lap1_time_s; }));
    }
    row.average_speed = mean_ci(collect(r, [](const SeedRun& s) { return s.stats.average_speed; }));
    row.nearest_opponent =
        mean_ci(collect(r, [](const SeedRun& s) { return s.stats.mean_nearest_opponent; }));
    row.off_road_pct = mean_ci(collect(r, [](const SeedRun& s) { return s.stats.off_road_pct; }));
    row.crash_pct = mean_ci(collect(r, [](const SeedRun& s) { return s.stats.crash_pct; }));
    row.trace_length = mean_ci(collect(r, [](const SeedRun& s) {
        return static_cast<double>(s.stats.trace_length);
    }));

    // Own persona for imitation runs; first label otherwise.
    std::vector<double> rb, re;
    for (const auto& run : r.runs) {
        if (run.rewards.empty()) throw ValidationError("run without rewards in " + r.spec.id);
        const auto it = r.spec.persona_label.empty() ? run.rewards.begin()
                                                     : run.rewards.find(r.spec.persona_label);
        if (it == run.rewards.end()) {
            throw ValidationError("run missing rewards for persona " + r.spec.persona_label);
        }
        rb.push_back(it->second.r_behavior);
        re.push_back(it->second.r_experience);
    }
    row.r_behavior = mean_ci(rb);
    row.r_experience = mean_ci(re);
    return row;
}

// ---------------------------------------------------------------------------

std::string seed_run_to_json(const ExperimentSpec& spec, const SeedRun& run) {
    json j;
    j["experiment"] = spec.id;
    j["kind"] = spec.kind == ExperimentKind::PersonaLambda
                    ? "persona"
                    : (spec.kind == ExperimentKind::Winner ? "winner" : "random");
    j["persona"] = spec.persona_label;
    j["lambda"] = spec.lambda;
    j["seed"] = run.seed;
    j["stats"]["final_score"] = run.stats.final_score;
    if (run.stats.lap1_time_s) j["stats"]["lap1_time_s"] = *run.stats.lap1_time_s;
    j["stats"]["average_speed"] = run.stats.average_speed;
    j["stats"]["nearest_opponent"] = run.stats.mean_nearest_opponent;
    j["stats"]["off_road_pct"] = run.stats.off_road_pct;
    j["stats"]["crash_pct"] = run.stats.crash_pct;
    j["stats"]["trace_length"] = run.stats.trace_length;
    j["cells_discovered"] = run.cells_discovered;
    j["key_space_fraction"] = run.key_space_fraction;
    j["lap2_key_space_fraction"] = run.lap2_key_space_fraction;
    for (const auto& [label, r] : run.rewards) {
        j["rewards"][label]["r_behavior"] = r.r_behavior;
        j["rewards"][label]["r_experience"] = r.r_experience;
    }
    json actions = json::array();
    for (const auto& a : run.actions) actions.push_back({a.steer, a.gas});
    j["actions"] = std::move(actions);
    j["arousal_trace"] = run.arousal_trace;
    return j.dump(2) + "\n";
}

namespace {

SeedRun seed_run_from_json(const json& j, ExperimentSpec& spec_out) {
    spec_out.id = j.at("experiment").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    spec_out.kind = kind == "persona" ? ExperimentKind::PersonaLambda
                                      : (kind == "winner" ? ExperimentKind::Winner
                                                          : ExperimentKind::Random);
    spec_out.persona_label = j.at("persona").get<std::string>();
    spec_out.lambda = j.at("lambda").get<double>();

    SeedRun run;
    run.seed = j.at("seed").get<std::uint64_t>();
    const auto& s = j.at("stats");
    run.stats.final_score = s.at("final_score").get<int>();
    if (s.contains("lap1_time_s")) run.stats.lap1_time_s = s.at("lap1_time_s").get<double>();
    run.stats.average_speed = s.at("average_speed").get<double>();
    run.stats.mean_nearest_opponent = s.at("nearest_opponent").get<double>();
    run.stats.off_road_pct = s.at("off_road_pct").get<double>();
    run.stats.crash_pct = s.at("crash_pct").get<double>();
    run.stats.trace_length = s.at("trace_length").get<int>();
    run.cells_discovered = j.value("cells_discovered", std::size_t{0});
    run.key_space_fraction = j.value("key_space_fraction", 0.0);
    run.lap2_key_space_fraction = j.value("lap2_key_space_fraction", 0.0);
    if (j.contains("rewards")) {
        for (const auto& [label, r] : j.at("rewards").items()) {
            run.rewards[label] = {r.at("r_behavior").get<double>(),
                                  r.at("r_experience").get<double>()};
        }
    }
    for (const auto& a : j.at("actions")) {
        run.actions.push_back({a.at(0).get<int>(), a.at(1).get<int>()});
    }
    run.arousal_trace = j.value("arousal_trace", std::vector<double>{});
    return run;
}

std::string ci_cell(const MeanCi& m) {
    return format_double(m.mean) + "," + format_double(m.ci);
}

}  // namespace

void write_results_csv(const std::vector<ExperimentResult>& results, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open results csv for writing: " + path);
    f << "experiment,persona,lambda,final_score,final_score_ci,lap1_time_s,lap1_time_s_ci,"
         "average_speed,average_speed_ci,nearest_opponent,nearest_opponent_ci,"
         "off_road_pct,off_road_pct_ci,crash_pct,crash_pct_ci,trace_length,trace_length_ci,"
         "r_behavior,r_behavior_ci,r_experience,r_experience_ci\n";
    for (const auto& r : results) {
        const AggregateRow row = aggregate_experiment(r);
        f << row.experiment << "," << row.persona_label << ","
          << (row.lambda ? format_double(*row.lambda) : "") << "," << ci_cell(row.final_score)
          << ",";
        if (row.lap1_time_s) {
            f << ci_cell(*row.lap1_time_s);
        } else {
            f << "N/A,N/A";
        }
        f << "," << ci_cell(row.average_speed) << "," << ci_cell(row.nearest_opponent) << ","
          << ci_cell(row.off_road_pct) << "," << ci_cell(row.crash_pct) << ","
          << ci_cell(row.trace_length) << "," << ci_cell(row.r_behavior) << ","
          << ci_cell(row.r_experience) << "\n";
    }
    if (!f) throw IoError("failed writing results csv: " + path);
}

void write_rewards_csv(const std::vector<ExperimentResult>& results, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open rewards csv for writing: " + path);
    f << "experiment,persona,r_behavior,r_behavior_ci,r_experience,r_experience_ci\n";
    for (const auto& r : results) {
        // One row per (experiment, persona) pair present in the runs.
        std::vector<std::string> labels;
        for (const auto& [label, unused] : r.runs.front().rewards) labels.push_back(label);
        for (const auto& label : labels) {
            std::vector<double> rb, re;
            for (const auto& run : r.runs) {
                rb.push_back(run.rewards.at(label).r_behavior);
                re.push_back(run.rewards.at(label).r_experience);
            }
            const MeanCi b = mean_ci(rb), e = mean_ci(re);
            f << r.spec.id << "," << label << "," << ci_cell(b) << "," << ci_cell(e) << "\n";
        }
    }
    if (!f) throw IoError("failed writing rewards csv: " + path);
}

void export_results(const std::vector<ExperimentResult>& results, const Config& config,
                    const std::string& dir) {
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "per_seed", ec);
    if (ec) throw IoError("cannot create output directory: " + dir);

    save_config(config, (fs::path(dir) / "resolved_config.json").string());
    for (const auto& r : results) {
        for (const auto& run : r.runs) {
            const std::string name = r.spec.id + "_seed" + std::to_string(run.seed) + ".json";
            std::ofstream f(fs::path(dir) / "per_seed" / name);
            if (!f) throw IoError("cannot open per-seed json for writing: " + name);
            f << seed_run_to_json(r.spec, run);
        }
    }
    write_results_csv(results, (fs::path(dir) / "results.csv").string());
    write_rewards_csv(results, (fs::path(dir) / "rewards.csv").string());
}

std::vector<ExperimentResult> import_results(const std::string& dir) {
    const fs::path per_seed = fs::path(dir) / "per_seed";
    if (!fs::exists(per_seed)) throw IoError("no per_seed directory under " + dir);

    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(per_seed)) {
        if (e.path().extension() == ".json") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no per-seed json files under " + dir);

    // Group by experiment id, keeping first-seen order of ids stable by name.
    std::vector<ExperimentResult> results;
    for (const auto& file : files) {
        std::ifstream f(file);
        json j;
        try {
            f >> j;
        } catch (const json::parse_error& e) {
            throw ParseError(file + ": " + e.what());
        }
        ExperimentSpec spec;
        SeedRun run = seed_run_from_json(j, spec);
        auto it = std::find_if(results.begin(), results.end(), [&](const ExperimentResult& r) {
            return r.spec.id == spec.id;
        });
        if (it == results.end()) {
            results.push_back({spec, {}});
            it = results.end() - 1;
        }
        it->runs.push_back(std::move(run));
    }
    for (auto& r : results) {
        std::sort(r.runs.begin(), r.runs.end(),
                  [](const SeedRun& a, const SeedRun& b) { return a.seed < b.seed; });
    }
    return results;
}

}  // namespace goblend::harness
