#include "explore/explorer.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace goblend::explore {

racing::Action sample_action(const ActionTable& table, Rng& rng) {
    double sum = 0.0;
    for (double v : table) sum += v;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("action table must be normalized (sums to " +
                              format_double(sum) + ")");
    }
    const double u = rng.unit();
    double acc = 0.0;
    for (int i = 0; i < racing::kActionCount; ++i) {
        acc += table[static_cast<std::size_t>(i)];
        if (u < acc) return racing::action_from_index(i);
    }
    return racing::action_from_index(racing::kActionCount - 1);
}

std::size_t select_cell(const Archive& archive, Rng& rng) {
    if (archive.size() == 0) throw ValidationError("cannot select from an empty archive");
    return rng.index(archive.size());
}

racing::GameState replay(const racing::TrackLayout& layout, std::uint64_t seed,
                         const std::vector<racing::Action>& actions) {
    racing::GameState st = racing::reset(layout, seed);
    for (const auto& a : actions) st = racing::step(layout, st, a);
    return st;
}

namespace {

struct StepOutcome {
    double r_behavior = 0.0;
    double r_experience = 0.0;
    double r_lambda = 0.0;
};

StepOutcome evaluate_window(Trajectory& traj, const racing::TrackLayout& layout,
                            const racing::GameState& st, racing::Action action,
                            const personas::PersonaModel* persona,
                            const affect::AffectIndex* index, RewardMode mode, double lambda) {
    static const std::vector<double> kZeroTargets(1, 0.0);
    const double hb = static_cast<double>(st.score) / racing::kMaxScore;
    double he = 0.0;
    if (mode == RewardMode::Blend) {
        he = index->estimate(racing::features(layout, st));
    }
    const std::vector<double>& tb = persona ? persona->target_score : kZeroTargets;
    const std::vector<double>& te = persona ? persona->target_arousal : kZeroTargets;
    traj.extend(action, hb, he, tb, te);

    StepOutcome out;
    if (mode == RewardMode::RawScore) {
        out.r_lambda = hb;
    } else {
        out.r_behavior = traj.reward_behavior();
        out.r_experience = traj.reward_experience();
        out.r_lambda = blend(out.r_experience, out.r_behavior, lambda);
    }
    return out;
}

// One iteration; when `mutex` is non-null only the select/offer touches on
// the shared archive are serialized, the rollout itself runs unlocked.
void run_iteration(Archive& archive, std::mutex* mutex, const racing::TrackLayout& layout,
                   const personas::PersonaModel* persona, const affect::AffectIndex* index,
                   const ActionTable& table, const ExplorationConfig& config, Rng& rng,
                   std::int64_t iteration, racing::SimDiagnostics* diag) {
    Trajectory traj;
    std::vector<std::uint8_t> snap;
    {
        std::unique_lock<std::mutex> lock;
        if (mutex) lock = std::unique_lock<std::mutex>(*mutex);
        const std::size_t pick = select_cell(archive, rng);
        traj = archive.entry(pick).trajectory;
        snap = archive.entry(pick).snapshot;
    }
    racing::GameState st = racing::restore(layout, snap);

    // Sampled restore-vs-replay equivalence assertion.
    if (config.replay_check_fraction > 0.0) {
        const auto every =
            static_cast<std::int64_t>(std::llround(1.0 / config.replay_check_fraction));
        if (every > 0 && iteration % every == 0) {
            const racing::GameState replayed = replay(layout, config.seed, traj.actions);
            if (!(replayed == st)) {
                throw ContractError("snapshot restore diverged from action-log replay");
            }
        }
    }

    for (int a = 0; a < config.actions_per_iteration && !st.finished; ++a) {
        const racing::Action action = sample_action(table, rng);
        st = racing::step(layout, st, action);
        const StepOutcome oc =
            evaluate_window(traj, layout, st, action, persona, index, config.mode, config.lambda);
        const racing::CellKey key = racing::discretize(layout, st, diag);
        if (mutex) {
            std::lock_guard<std::mutex> lock(*mutex);
            archive.offer(key, oc.r_lambda, traj, oc.r_behavior, oc.r_experience, st.score,
                          iteration, layout, st);
        } else {
            archive.offer(key, oc.r_lambda, traj, oc.r_behavior, oc.r_experience, st.score,
                          iteration, layout, st);
        }
    }
}

}  // namespace

void verify_entry_replay(const racing::TrackLayout& layout, std::uint64_t seed,
                         const ArchiveEntry& entry, const personas::PersonaModel* persona,
                         const affect::AffectIndex* index) {
    Trajectory traj;
    racing::GameState st = racing::reset(layout, seed);
    const bool blend_mode = index != nullptr;
    for (const auto& a : entry.trajectory.actions) {
        st = racing::step(layout, st, a);
        evaluate_window(traj, layout, st, a, persona, index,
                        blend_mode ? RewardMode::Blend : RewardMode::RawScore, /*lambda=*/0.0);
    }
    const racing::CellKey key = racing::discretize(layout, st);
    if (!(key == entry.key)) throw ContractError("replayed entry reached a different cell");
    if (st.score != entry.raw_score) throw ContractError("replayed entry score mismatch");
    if (blend_mode) {
        if (traj.reward_behavior() != entry.r_behavior ||
            traj.reward_experience() != entry.r_experience) {
            throw ContractError("replayed entry rewards diverged from stored values");
        }
    }
    if (traj.h_behavior != entry.trajectory.h_behavior ||
        traj.h_experience != entry.trajectory.h_experience) {
        throw ContractError("replayed entry traces diverged from cached traces");
    }
}

void explore_step(Archive& archive, const racing::TrackLayout& layout,
                  const personas::PersonaModel* persona, const affect::AffectIndex* index,
                  const ActionTable& table, const ExplorationConfig& config, Rng& rng,
                  std::int64_t iteration, racing::SimDiagnostics* diag) {
    run_iteration(archive, nullptr, layout, persona, index, table, config, rng, iteration, diag);
}

namespace {

bool entry_beats(const ArchiveEntry& a, const ArchiveEntry& b) {
    if (std::abs(a.r_lambda - b.r_lambda) > kRewardEqualTol) return a.r_lambda > b.r_lambda;
    if (a.raw_score != b.raw_score) return a.raw_score > b.raw_score;
    return a.trajectory.length() < b.trajectory.length();
}

ArchiveEntry best_entry(const Archive& archive) {
    const ArchiveEntry* best = &archive.entry(0);
    for (std::size_t i = 1; i < archive.size(); ++i) {
        if (entry_beats(archive.entry(i), *best)) best = &archive.entry(i);
    }
    return *best;
}

}  // namespace

ExplorationResult run_exploration(const racing::TrackLayout& layout,
                                  const personas::PersonaModel* persona,
                                  const affect::AffectIndex* index, const ActionTable& table,
                                  const ExplorationConfig& config,
                                  racing::SimDiagnostics* diag) {
    if (config.iterations < 1) throw ValidationError("iterations must be >= 1");
    if (config.lambda < 0.0 || config.lambda > 1.0) throw ValidationError("lambda must be in [0,1]");
    if (config.mode == RewardMode::Blend && (!persona || !index)) {
        throw ValidationError("blend mode needs a persona and an affect index");
    }

    ExplorationResult result;
    // Seed the archive with the reset-state cell.
    {
        const racing::GameState st = racing::reset(layout, config.seed);
        const racing::CellKey key = racing::discretize(layout, st);
        result.archive.offer(key, 0.0, Trajectory{}, 0.0, 0.0, st.score, 0, layout, st);
    }

    const double key_space = static_cast<double>(layout.cell_key_space());
    const auto log_progress = [&](std::int64_t iteration) {
        ProgressRow row;
        row.iteration = iteration;
        row.cells = result.archive.size();
        row.key_space_fraction = static_cast<double>(result.archive.size()) / key_space;
        row.lap2_key_space_fraction =
            static_cast<double>(result.archive.lap2_cells()) / (key_space / 2.0);
        row.best_r_lambda = best_entry(result.archive).r_lambda;
        result.progress.push_back(row);
    };

    if (config.workers <= 1) {
        Rng rng(splitmix64(config.seed));
        for (std::int64_t it = 1; it <= config.iterations; ++it) {
            explore_step(result.archive, layout, persona, index, table, config, rng, it, diag);
            if (it % config.progress_every == 0 || it == config.iterations) log_progress(it);
        }
    } else {
        std::mutex m;
        std::vector<std::thread> pool;
        std::int64_t remaining = config.iterations;
        const std::int64_t chunk = (config.iterations + config.workers - 1) / config.workers;
        for (int w = 0; w < config.workers && remaining > 0; ++w) {
            const std::int64_t count = std::min<std::int64_t>(chunk, remaining);
            remaining -= count;
            pool.emplace_back([&, w, count] {
                Rng rng(splitmix64(config.seed ^ counter_hash(config.seed, 0, 1000 + w)));
                // Diagnostics are not plumbed through workers to keep the
                // rollout lock-free.
                for (std::int64_t it = 1; it <= count; ++it) {
                    run_iteration(result.archive, &m, layout, persona, index, table, config, rng,
                                  it, nullptr);
                }
            });
        }
        for (auto& t : pool) t.join();
        log_progress(config.iterations);
    }

    result.best = best_entry(result.archive);
    result.iterations_run = config.iterations;
    return result;
}

void save_progress_csv(const std::vector<ProgressRow>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open progress file for writing: " + path);
    f << "iteration,cells,key_space_fraction,lap2_key_space_fraction,best_r_lambda\n";
    for (const auto& r : rows) {
        f << r.iteration << "," << r.cells << "," << format_double(r.key_space_fraction) << ","
          << format_double(r.lap2_key_space_fraction) << "," << format_double(r.best_r_lambda)
          << "\n";
    }
    if (!f) throw IoError("failed writing progress: " + path);
}

}  // namespace goblend::explore
