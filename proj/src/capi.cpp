#include "goblend/goblend.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "common/errors.hpp"
#include "explore/explorer.hpp"
#include "harness/config.hpp"
#include "harness/experiments.hpp"
#include "harness/report.hpp"
#include "harness/svg.hpp"
#include "personas/persona.hpp"
#include "traces/generator.hpp"

namespace fs = std::filesystem;
using namespace goblend;

namespace {

thread_local std::string g_last_error;

gb_status set_error(gb_status code, const char* what) {
    g_last_error = what ? what : "";
    return code;
}

template <typename Fn>
gb_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return GB_OK;
    } catch (const IoError& e) {
        return set_error(GB_ERR_IO, e.what());
    } catch (const ParseError& e) {
        return set_error(GB_ERR_PARSE, e.what());
    } catch (const ValidationError& e) {
        return set_error(GB_ERR_VALIDATION, e.what());
    } catch (const ContractError& e) {
        return set_error(GB_ERR_CONTRACT, e.what());
    } catch (const std::exception& e) {
        return set_error(GB_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(GB_ERR_INTERNAL, "unknown error");
    }
}

gb_status require(bool ok, const char* what) {
    return ok ? GB_OK : set_error(GB_ERR_INVALID_ARGUMENT, what);
}

harness::Config load_config_or_default(const char* config_path) {
    if (config_path && *config_path) return harness::load_config(config_path);
    return harness::default_config();
}

}  // namespace

struct gb_track {
    racing::TrackLayout layout;
};

struct gb_env {
    const gb_track* track = nullptr;
    racing::GameState state;
};

extern "C" {

const char* gb_version(void) { return "0.1.0"; }

const char* gb_last_error(void) { return g_last_error.c_str(); }

/* ------------------------------------------------------------------ */

gb_status gb_track_default(gb_track** out) {
    if (require(out != nullptr, "out must not be NULL") != GB_OK) return GB_ERR_INVALID_ARGUMENT;
    return guarded([&] { *out = new gb_track{racing::default_track()}; });
}

gb_status gb_track_load(const char* path, gb_track** out) {
    if (require(path && out, "path and out must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] { *out = new gb_track{racing::load_track(path)}; });
}

gb_status gb_track_save(const gb_track* track, const char* path) {
    if (require(track && path, "track and path must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] { racing::save_track(track->layout, path); });
}

void gb_track_free(gb_track* track) { delete track; }

int gb_track_segment_count(const gb_track* t) { return t ? t->layout.segment_count() : 0; }
int gb_track_sub_segment_count(const gb_track* t) { return t ? t->layout.sub_segment_count() : 0; }
int gb_track_checkpoints_per_lap(const gb_track* t) {
    return t ? static_cast<int>(t->layout.checkpoint_segments.size()) : 0;
}
long long gb_track_cell_key_space(const gb_track* t) { return t ? t->layout.cell_key_space() : 0; }
double gb_track_lap_length(const gb_track* t) { return t ? t->layout.lap_length : 0.0; }

/* ------------------------------------------------------------------ */

gb_status gb_env_create(const gb_track* track, uint64_t seed, gb_env** out) {
    if (require(track && out, "track and out must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] { *out = new gb_env{track, racing::reset(track->layout, seed)}; });
}

void gb_env_free(gb_env* env) { delete env; }

gb_status gb_env_reset(gb_env* env, uint64_t seed) {
    if (require(env != nullptr, "env must not be NULL") != GB_OK) return GB_ERR_INVALID_ARGUMENT;
    return guarded([&] { env->state = racing::reset(env->track->layout, seed); });
}

gb_status gb_env_step(gb_env* env, int steer, int gas) {
    if (require(env != nullptr, "env must not be NULL") != GB_OK) return GB_ERR_INVALID_ARGUMENT;
    return guarded([&] { env->state = racing::step(env->track->layout, env->state, {steer, gas}); });
}

int gb_env_finished(const gb_env* env) { return env && env->state.finished ? 1 : 0; }
int gb_env_score(const gb_env* env) { return env ? env->state.score : 0; }
int gb_env_lap(const gb_env* env) { return env ? env->state.lap : 0; }
int gb_env_window_index(const gb_env* env) { return env ? env->state.window_index : 0; }
double gb_env_elapsed_s(const gb_env* env) { return env ? env->state.elapsed_s : 0.0; }

gb_status gb_env_features(const gb_env* env, double* out, size_t len) {
    if (require(env && out, "env and out must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    if (require(len >= GB_FEATURE_COUNT, "feature buffer too small") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const auto f = racing::features(env->track->layout, env->state);
        std::memcpy(out, f.data(), sizeof(double) * f.size());
    });
}

gb_status gb_env_cell_key(const gb_env* env, int* lap, int* sub_segment, int* speed_bucket,
                          int* rotation_bucket, int* proximity) {
    if (require(env != nullptr, "env must not be NULL") != GB_OK) return GB_ERR_INVALID_ARGUMENT;
    return guarded([&] {
        const racing::CellKey k = racing::discretize(env->track->layout, env->state);
        if (lap) *lap = k.lap;
        if (sub_segment) *sub_segment = k.sub_segment;
        if (speed_bucket) *speed_bucket = k.speed_bucket;
        if (rotation_bucket) *rotation_bucket = k.rotation_bucket;
        if (proximity) *proximity = k.proximity;
    });
}

gb_status gb_env_snapshot(const gb_env* env, uint8_t** blob, size_t* len) {
    if (require(env && blob && len, "env, blob and len must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const auto bytes = racing::snapshot(env->track->layout, env->state);
        auto* out = static_cast<uint8_t*>(std::malloc(bytes.size()));
        if (!out) throw std::bad_alloc();
        std::memcpy(out, bytes.data(), bytes.size());
        *blob = out;
        *len = bytes.size();
    });
}

gb_status gb_env_restore(gb_env* env, const uint8_t* blob, size_t len) {
    if (require(env && blob, "env and blob must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const std::vector<uint8_t> bytes(blob, blob + len);
        env->state = racing::restore(env->track->layout, bytes);
    });
}

void gb_buffer_free(uint8_t* blob) { std::free(blob); }

/* ------------------------------------------------------------------ */

gb_status gb_generate_cohort(const char* config_path, const char* out_csv) {
    if (require(out_csv != nullptr, "out_csv must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const harness::Config config = load_config_or_default(config_path);
        const racing::TrackLayout layout = config.load_track();
        const traces::Dataset dataset = traces::generate_cohort(layout, config.generator);
        traces::save_sessions(dataset, out_csv);
    });
}

gb_status gb_cluster_personas(const char* config_path, const char* dataset_csv,
                              const char* out_dir) {
    if (require(dataset_csv && out_dir, "dataset_csv and out_dir must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const harness::Config config = load_config_or_default(config_path);
        const traces::Dataset dataset = traces::load_sessions(dataset_csv);
        const auto outcome = personas::cluster_personas(dataset, config.cluster_cut_threshold);

        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw IoError(std::string("cannot create output directory: ") + out_dir);
        for (const auto& p : outcome.personas) {
            personas::save_persona(p, (fs::path(out_dir) / ("persona_" + p.label + ".txt")).string());
        }
        personas::save_dendrogram_csv(outcome.dendrogram,
                                      (fs::path(out_dir) / "dendrogram.csv").string());
        std::ofstream assign(fs::path(out_dir) / "assignments.csv");
        if (!assign) throw IoError("cannot open assignments.csv for writing");
        assign << "session_id,cluster\n";
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            assign << dataset[i].session_id << "," << outcome.assignment[i] << "\n";
        }
        harness::save_config(config, (fs::path(out_dir) / "resolved_config.json").string());
    });
}

gb_status gb_explore(const char* config_path, const char* dataset_csv, const char* persona,
                     double lambda, uint64_t seed, long long iterations, int k,
                     const char* weighting, const char* out_dir) {
    if (require(dataset_csv && persona && out_dir,
                "dataset_csv, persona and out_dir must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        harness::Config config = load_config_or_default(config_path);
        if (iterations > 0) config.iterations = iterations;
        if (k > 0) config.knn_k = k;
        if (weighting && *weighting) config.knn_weighting = affect::weighting_from_name(weighting);
        config.seeds = {seed};

        const racing::TrackLayout layout = config.load_track();
        const traces::Dataset dataset = traces::load_sessions(dataset_csv);
        const explore::ActionTable table = traces::action_frequency_table(dataset);

        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw IoError(std::string("cannot create output directory: ") + out_dir);
        harness::save_config(config, (fs::path(out_dir) / "resolved_config.json").string());

        harness::ExperimentSpec spec;
        std::unique_ptr<personas::PersonaModel> model;
        std::unique_ptr<affect::AffectIndex> index;
        const std::string persona_arg = persona;
        if (persona_arg == "winner") {
            spec = {"winner", harness::ExperimentKind::Winner, "", 0.0};
        } else if (persona_arg == "random") {
            spec = {"random", harness::ExperimentKind::Random, "", 0.0};
        } else {
            model = std::make_unique<personas::PersonaModel>(personas::load_persona(persona_arg));
            index = std::make_unique<affect::AffectIndex>(dataset, *model, config.knn_k,
                                                          config.knn_weighting);
            const double l = lambda >= 0.0 ? lambda : config.lambdas.front();
            spec = {model->label + "_" + harness::lambda_suffix(l),
                    harness::ExperimentKind::PersonaLambda, model->label, l};
        }

        harness::SeedRun run;
        run.seed = seed;
        racing::SimDiagnostics diag;
        if (spec.kind == harness::ExperimentKind::Random) {
            Rng rng(splitmix64(seed));
            racing::GameState st = racing::reset(layout, seed);
            while (!st.finished) {
                const racing::Action a = explore::sample_action(table, rng);
                st = racing::step(layout, st, a);
                run.actions.push_back(a);
            }
        } else {
            explore::ExplorationConfig ec2;
            ec2.iterations = config.iterations;
            ec2.actions_per_iteration = config.actions_per_iteration;
            ec2.lambda = spec.lambda;
            ec2.seed = seed;
            ec2.workers = config.workers;
            ec2.replay_check_fraction = config.replay_check_fraction;
            ec2.progress_every = config.progress_every;
            ec2.mode = spec.kind == harness::ExperimentKind::Winner
                           ? explore::RewardMode::RawScore
                           : explore::RewardMode::Blend;
            const auto result = explore::run_exploration(layout, model.get(), index.get(), table,
                                                         ec2, &diag);
            run.actions = result.best.trajectory.actions;
            run.arousal_trace = result.best.trajectory.h_experience;
            run.cells_discovered = result.archive.size();
            if (!result.progress.empty()) {
                run.key_space_fraction = result.progress.back().key_space_fraction;
                run.lap2_key_space_fraction = result.progress.back().lap2_key_space_fraction;
            }
            explore::dump_archive(result.archive, out_dir);
            explore::save_progress_csv(result.progress,
                                       (fs::path(out_dir) / "progress.csv").string());
        }

        run.stats = harness::compute_stats(layout, seed, run.actions);
        if (model) {
            run.rewards[model->label] = harness::compare_rewards(layout, seed, run.actions,
                                                                 *model, *index);
        }
        harness::write_text_file(harness::seed_run_to_json(spec, run),
                                 (fs::path(out_dir) / "best.json").string());

        std::ofstream dlog(fs::path(out_dir) / "diagnostics.txt");
        dlog << "experiment " << spec.id << "\n"
             << "seed " << seed << "\n"
             << "final_score " << run.stats.final_score << "\n"
             << "cells_discovered " << run.cells_discovered << "\n"
             << "off_playfield_projections " << diag.off_playfield_projections << "\n";
    });
}

gb_status gb_run_matrix(const char* config_path, const char* dataset_csv, const char* personas_dir,
                        const char* out_dir) {
    if (require(dataset_csv && personas_dir && out_dir,
                "dataset_csv, personas_dir and out_dir must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const harness::Config config = load_config_or_default(config_path);
        const racing::TrackLayout layout = config.load_track();
        const traces::Dataset dataset = traces::load_sessions(dataset_csv);

        std::vector<personas::PersonaModel> models;
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(personas_dir)) {
            const std::string name = e.path().filename().string();
            if (name.rfind("persona_", 0) == 0 && e.path().extension() == ".txt") {
                files.push_back(e.path().string());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) models.push_back(personas::load_persona(f));
        if (models.empty()) {
            throw ValidationError(std::string("no persona_*.txt artifacts under ") + personas_dir);
        }

        const auto results = harness::run_matrix(layout, dataset, models, config);
        harness::export_results(results, config, out_dir);
    });
}

gb_status gb_report(const char* runs_dir, const char* out_csv) {
    if (require(runs_dir && out_csv, "runs_dir and out_csv must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const auto results = harness::import_results(runs_dir);
        harness::write_results_csv(results, out_csv);
    });
}

gb_status gb_render_trace(const char* run_json, const char* config_path, const char* out_svg) {
    if (require(run_json && out_svg, "run_json and out_svg must not be NULL") != GB_OK) {
        return GB_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const harness::Config config = load_config_or_default(config_path);
        const racing::TrackLayout layout = config.load_track();

        std::ifstream f(run_json);
        if (!f) throw IoError(std::string("cannot open run json: ") + run_json);
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string(run_json) + ": " + e.what());
        }
        std::vector<racing::Action> actions;
        for (const auto& a : j.at("actions")) {
            actions.push_back({a.at(0).get<int>(), a.at(1).get<int>()});
        }
        const auto arousal = j.value("arousal_trace", std::vector<double>{});
        const auto seed = j.at("seed").get<std::uint64_t>();
        harness::write_text_file(
            harness::render_trajectory_svg(layout, seed, actions, arousal), out_svg);
    });
}

} /* extern "C" */
