#pragma once

#include <optional>
#include <string>
#include <vector>

#include "harness/experiments.hpp"

namespace goblend::harness {

struct AggregateRow {
    std::string experiment;
    std::string persona_label;
    std::optional<double> lambda;         // absent for baselines
    MeanCi final_score;
    std::optional<MeanCi> lap1_time_s;    // absent unless every seed finished lap 1
    MeanCi average_speed;
    MeanCi nearest_opponent;
    MeanCi off_road_pct;
    MeanCi crash_pct;
    MeanCi trace_length;
    // Rewards against the run's own persona; for baselines the map spans all
    // personas and these hold the first label's value.
    MeanCi r_behavior;
    MeanCi r_experience;
};

AggregateRow aggregate_experiment(const ExperimentResult& result);

// Writes results.csv, rewards.csv and per_seed/<id>_seed<k>.json under dir,
// plus the resolved config copy.
void export_results(const std::vector<ExperimentResult>& results, const Config& config,
                    const std::string& dir);

// Loads the per-seed JSON files back into memory (actions included), so
// aggregates can be recomputed exactly.
std::vector<ExperimentResult> import_results(const std::string& dir);

// Recomputes results.csv from the per-seed files of a previous export.
void write_results_csv(const std::vector<ExperimentResult>& results, const std::string& path);
void write_rewards_csv(const std::vector<ExperimentResult>& results, const std::string& path);

std::string seed_run_to_json(const ExperimentSpec& spec, const SeedRun& run);

}  // namespace goblend::harness
