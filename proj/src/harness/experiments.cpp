#include "harness/experiments.hpp"

#include <atomic>
#include <memory>
#include <thread>

#include "common/errors.hpp"
#include "common/text.hpp"
#include "explore/reward.hpp"

namespace goblend::harness {

std::string lambda_suffix(double lambda) {
    std::string s = format_double(lambda);
    return "l" + s;
}

std::vector<ExperimentSpec> matrix_specs(const std::vector<personas::PersonaModel>& personas,
                                         const Config& config) {
    std::vector<ExperimentSpec> specs;
    for (const auto& p : personas) {
        for (double lambda : config.lambdas) {
            ExperimentSpec s;
            s.kind = ExperimentKind::PersonaLambda;
            s.persona_label = p.label;
            s.lambda = lambda;
            s.id = p.label + "_" + lambda_suffix(lambda);
            specs.push_back(s);
        }
    }
    specs.push_back({"winner", ExperimentKind::Winner, "", 0.0});
    specs.push_back({"random", ExperimentKind::Random, "", 0.0});
    return specs;
}

namespace {

const personas::PersonaModel* find_persona(const std::vector<personas::PersonaModel>& personas,
                                           const std::string& label) {
    for (const auto& p : personas) {
        if (p.label == label) return &p;
    }
    return nullptr;
}

// Behavior trace plus one experience trace per persona, from one replay.
struct ReplayTraces {
    std::vector<double> behavior;
    std::map<std::string, std::vector<double>> experience;
};

ReplayTraces replay_traces(const racing::TrackLayout& layout, std::uint64_t seed,
                           const std::vector<racing::Action>& actions,
                           const std::map<std::string, const affect::AffectIndex*>& indexes) {
    ReplayTraces out;
    racing::GameState st = racing::reset(layout, seed);
    for (const auto& a : actions) {
        st = racing::step(layout, st, a);
        out.behavior.push_back(static_cast<double>(st.score) / racing::kMaxScore);
        const auto f = racing::features(layout, st);
        for (const auto& [label, index] : indexes) {
            out.experience[label].push_back(index->estimate(f));
        }
    }
    return out;
}

std::vector<racing::Action> random_rollout(const racing::TrackLayout& layout, std::uint64_t seed,
                                           const explore::ActionTable& table) {
    Rng rng(splitmix64(seed));
    std::vector<racing::Action> actions;
    racing::GameState st = racing::reset(layout, seed);
    while (!st.finished) {
        const racing::Action a = explore::sample_action(table, rng);
        st = racing::step(layout, st, a);
        actions.push_back(a);
    }
    return actions;
}

SeedRun run_one_seed(const racing::TrackLayout& layout,
                     const std::vector<personas::PersonaModel>& personas,
                     const std::map<std::string, const affect::AffectIndex*>& indexes,
                     const explore::ActionTable& table, const Config& config,
                     const ExperimentSpec& spec, std::uint64_t seed) {
    SeedRun run;
    run.seed = seed;

    if (spec.kind == ExperimentKind::Random) {
        run.actions = random_rollout(layout, seed, table);
    } else {
        explore::ExplorationConfig ec;
        ec.iterations = config.iterations;
        ec.actions_per_iteration = config.actions_per_iteration;
        ec.lambda = spec.lambda;
        ec.seed = seed;
        ec.workers = config.workers;
        ec.replay_check_fraction = config.replay_check_fraction;
        ec.progress_every = config.progress_every;

        const personas::PersonaModel* persona = nullptr;
        const affect::AffectIndex* index = nullptr;
        if (spec.kind == ExperimentKind::Winner) {
            ec.mode = explore::RewardMode::RawScore;
        } else {
            ec.mode = explore::RewardMode::Blend;
            persona = find_persona(personas, spec.persona_label);
            if (!persona) throw ValidationError("missing persona artifact: " + spec.persona_label);
            index = indexes.at(spec.persona_label);
        }
        const auto result = explore::run_exploration(layout, persona, index, table, ec);
        run.actions = result.best.trajectory.actions;
        run.cells_discovered = result.archive.size();
        if (!result.progress.empty()) {
            run.key_space_fraction = result.progress.back().key_space_fraction;
            run.lap2_key_space_fraction = result.progress.back().lap2_key_space_fraction;
        }
    }

    if (run.actions.empty()) {
        throw ContractError("experiment " + spec.id + " produced an empty trajectory");
    }

    // Everything reported below comes from a fresh replay of the action log.
    run.stats = compute_stats(layout, seed, run.actions);
    const bool all_personas = spec.kind != ExperimentKind::PersonaLambda;
    std::map<std::string, const affect::AffectIndex*> wanted;
    if (all_personas) {
        wanted = indexes;
    } else {
        wanted[spec.persona_label] = indexes.at(spec.persona_label);
    }
    const ReplayTraces traces = replay_traces(layout, seed, run.actions, wanted);
    for (const auto& [label, he] : traces.experience) {
        const personas::PersonaModel* p = find_persona(personas, label);
        RewardPair r;
        r.r_behavior = explore::trace_similarity(traces.behavior, p->target_score);
        r.r_experience = explore::trace_similarity(he, p->target_arousal);
        run.rewards[label] = r;
    }
    run.arousal_trace = all_personas ? traces.experience.begin()->second
                                     : traces.experience.at(spec.persona_label);
    return run;
}

}  // namespace

ExperimentResult run_experiment(const racing::TrackLayout& layout, const traces::Dataset& dataset,
                                const std::vector<personas::PersonaModel>& personas,
                                const Config& config, const ExperimentSpec& spec) {
    std::map<std::string, std::unique_ptr<affect::AffectIndex>> owned;
    std::map<std::string, const affect::AffectIndex*> indexes;
    for (const auto& p : personas) {
        owned[p.label] = std::make_unique<affect::AffectIndex>(dataset, p, config.knn_k,
                                                               config.knn_weighting);
        indexes[p.label] = owned[p.label].get();
    }
    const explore::ActionTable table = traces::action_frequency_table(dataset);

    ExperimentResult result;
    result.spec = spec;
    for (std::uint64_t seed : config.seeds) {
        result.runs.push_back(
            run_one_seed(layout, personas, indexes, table, config, spec, seed));
    }
    return result;
}

std::vector<ExperimentResult> run_matrix(const racing::TrackLayout& layout,
                                         const traces::Dataset& dataset,
                                         const std::vector<personas::PersonaModel>& personas,
                                         const Config& config) {
    std::map<std::string, std::unique_ptr<affect::AffectIndex>> owned;
    std::map<std::string, const affect::AffectIndex*> indexes;
    for (const auto& p : personas) {
        owned[p.label] = std::make_unique<affect::AffectIndex>(dataset, p, config.knn_k,
                                                               config.knn_weighting);
        indexes[p.label] = owned[p.label].get();
    }
    const explore::ActionTable table = traces::action_frequency_table(dataset);
    const auto specs = matrix_specs(personas, config);

    struct Job {
        std::size_t spec_idx;
        std::size_t seed_idx;
    };
    std::vector<Job> jobs;
    for (std::size_t si = 0; si < specs.size(); ++si) {
        for (std::size_t ki = 0; ki < config.seeds.size(); ++ki) jobs.push_back({si, ki});
    }

    std::vector<ExperimentResult> results(specs.size());
    for (std::size_t si = 0; si < specs.size(); ++si) {
        results[si].spec = specs[si];
        results[si].runs.resize(config.seeds.size());
    }

    int width = config.parallel_runs > 0
                    ? config.parallel_runs
                    : static_cast<int>(std::thread::hardware_concurrency());
    if (width < 1) width = 1;

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(width));
    for (int w = 0; w < width; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (;;) {
                    const std::size_t j = next.fetch_add(1);
                    if (j >= jobs.size()) break;
                    const Job job = jobs[j];
                    results[job.spec_idx].runs[job.seed_idx] =
                        run_one_seed(layout, personas, indexes, table, config, specs[job.spec_idx],
                                     config.seeds[job.seed_idx]);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace goblend::harness
