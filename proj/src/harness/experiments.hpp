#pragma once

#include <map>
#include <string>
#include <vector>

#include "harness/config.hpp"
#include "harness/stats.hpp"

namespace goblend::harness {

enum class ExperimentKind { PersonaLambda, Winner, Random };

struct ExperimentSpec {
    std::string id;
    ExperimentKind kind = ExperimentKind::PersonaLambda;
    std::string persona_label;   // empty for baselines
    double lambda = 0.0;
};

std::string lambda_suffix(double lambda);

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<racing::Action> actions;     // best trajectory (or the full random rollout)
    std::vector<double> arousal_trace;       // experience trace along the trajectory
    InGameStatistics stats;
    // Rewards per persona label: own persona for imitation runs, all
    // personas for the baselines.
    std::map<std::string, RewardPair> rewards;
    std::size_t cells_discovered = 0;
    double key_space_fraction = 0.0;
    double lap2_key_space_fraction = 0.0;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<SeedRun> runs;
};

// The full protocol: persona x lambda plus the winner and random baselines,
// one run per configured seed.
std::vector<ExperimentSpec> matrix_specs(const std::vector<personas::PersonaModel>& personas,
                                         const Config& config);

ExperimentResult run_experiment(const racing::TrackLayout& layout, const traces::Dataset& dataset,
                                const std::vector<personas::PersonaModel>& personas,
                                const Config& config, const ExperimentSpec& spec);

// Runs every spec; (experiment, seed) pairs execute in parallel, bounded by
// config.parallel_runs. Output order matches matrix_specs.
std::vector<ExperimentResult> run_matrix(const racing::TrackLayout& layout,
                                         const traces::Dataset& dataset,
                                         const std::vector<personas::PersonaModel>& personas,
                                         const Config& config);

}  // namespace goblend::harness
