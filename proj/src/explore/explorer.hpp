#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "affect/knn.hpp"
#include "common/rng.hpp"
#include "explore/archive.hpp"
#include "personas/persona.hpp"

namespace goblend::explore {

enum class RewardMode {
    Blend,     // r_lambda = lambda * r_e + (1 - lambda) * r_b
    RawScore,  // r_lambda = score / 16 (the score-maximizing baseline)
};

using ActionTable = std::array<double, racing::kActionCount>;

struct ExplorationConfig {
    std::int64_t iterations = 50000;
    int actions_per_iteration = 20;
    double lambda = 0.0;
    std::uint64_t seed = 1;
    RewardMode mode = RewardMode::Blend;
    int workers = 1;                      // >1 keeps invariants but not run identity
    double replay_check_fraction = 0.01;  // sampled restore-vs-replay assertions
    std::int64_t progress_every = 1000;
};

struct ProgressRow {
    std::int64_t iteration = 0;
    std::size_t cells = 0;
    double key_space_fraction = 0.0;
    double lap2_key_space_fraction = 0.0;
    double best_r_lambda = 0.0;
};

struct ExplorationResult {
    Archive archive;
    ArchiveEntry best;
    std::vector<ProgressRow> progress;
    std::int64_t iterations_run = 0;
};

// Weighted draw from the 9 (steer, gas) combinations. The table must sum
// to 1 (within 1e-9).
racing::Action sample_action(const ActionTable& table, Rng& rng);

// Uniform random choice over archive entries; index into entries().
std::size_t select_cell(const Archive& archive, Rng& rng);

// One iteration: select, restore, take up to actions_per_iteration sampled
// actions (early out when the episode ends) and offer every visited cell.
// `persona` and `index` may be null in RawScore mode.
void explore_step(Archive& archive, const racing::TrackLayout& layout,
                  const personas::PersonaModel* persona, const affect::AffectIndex* index,
                  const ActionTable& table, const ExplorationConfig& config, Rng& rng,
                  std::int64_t iteration, racing::SimDiagnostics* diag = nullptr);

ExplorationResult run_exploration(const racing::TrackLayout& layout,
                                  const personas::PersonaModel* persona,
                                  const affect::AffectIndex* index, const ActionTable& table,
                                  const ExplorationConfig& config,
                                  racing::SimDiagnostics* diag = nullptr);

// Replays an action log from reset and returns the final state.
racing::GameState replay(const racing::TrackLayout& layout, std::uint64_t seed,
                         const std::vector<racing::Action>& actions);

// Recomputes the trajectory of an entry from a fresh replay and checks that
// cell key, raw score and both rewards match the stored values exactly.
// Throws ContractError on divergence.
void verify_entry_replay(const racing::TrackLayout& layout, std::uint64_t seed,
                         const ArchiveEntry& entry, const personas::PersonaModel* persona,
                         const affect::AffectIndex* index);

void save_progress_csv(const std::vector<ProgressRow>& rows, const std::string& path);

}  // namespace goblend::explore
