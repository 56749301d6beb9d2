#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affect/knn.hpp"
#include "traces/generator.hpp"

namespace goblend::harness {

// Full pipeline configuration. Everything an experiment depends on lives
// here; each run writes its resolved copy beside its outputs.
struct Config {
    std::string track_path;   // empty = bundled default track

    traces::GeneratorConfig generator = traces::GeneratorConfig::defaults();

    // Dendrogram cut threshold calibrated on the default synthetic cohort.
    double cluster_cut_threshold = 40.0;

    int knn_k = 5;
    affect::Weighting knn_weighting = affect::Weighting::Dudani;

    std::int64_t iterations = 50000;
    int actions_per_iteration = 20;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<double> lambdas = {0.0, 0.5, 1.0};
    double replay_check_fraction = 0.01;
    int workers = 1;
    std::int64_t progress_every = 1000;

    // Matrix parallelism: how many (experiment, seed) runs in flight.
    int parallel_runs = 0;   // 0 = hardware concurrency

    racing::TrackLayout load_track() const;
};

Config load_config(const std::string& path);      // missing keys keep defaults
Config default_config();
void save_config(const Config& config, const std::string& path);
std::string config_to_json(const Config& config);

}  // namespace goblend::harness
