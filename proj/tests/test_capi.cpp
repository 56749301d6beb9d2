// Exercises the shared-library surface the CLI is built on.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "goblend/goblend.h"

namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    const auto p = fs::temp_directory_path() / "goblend_test_capi";
    fs::create_directories(p);
    return p;
}

// Small pipeline config: tiny cohort, tiny exploration budget.
std::string small_config_path() {
    const auto path = work_dir() / "config.json";
    std::ofstream f(path);
    f << R"({
  "generator": {
    "base_seed": 9000,
    "cohort": {"expert": 2, "advanced": 2, "intermediate": 2, "beginner": 2}
  },
  "exploration": {
    "iterations": 200,
    "seeds": [1],
    "replay_check_fraction": 0.05,
    "parallel_runs": 2
  }
})";
    return path.string();
}

}  // namespace

TEST_CASE("version and error state") {
    CHECK(gb_version() != nullptr);
    CHECK(std::strlen(gb_version()) > 0);
    CHECK(gb_last_error() != nullptr);
}

TEST_CASE("default track properties through the C surface") {
    gb_track* track = nullptr;
    REQUIRE(gb_track_default(&track) == GB_OK);
    REQUIRE(track != nullptr);
    CHECK(gb_track_segment_count(track) == 19);
    CHECK(gb_track_sub_segment_count(track) == 76);
    CHECK(gb_track_checkpoints_per_lap(track) == 8);
    CHECK(gb_track_cell_key_space(track) == 3648);
    CHECK(gb_track_lap_length(track) > 500.0);

    const auto path = (work_dir() / "saved.track").string();
    CHECK(gb_track_save(track, path.c_str()) == GB_OK);
    gb_track* loaded = nullptr;
    CHECK(gb_track_load(path.c_str(), &loaded) == GB_OK);
    CHECK(gb_track_segment_count(loaded) == 19);
    gb_track_free(loaded);
    gb_track_free(track);

    gb_track* missing = nullptr;
    CHECK(gb_track_load("/nonexistent/track.file", &missing) == GB_ERR_IO);
    CHECK(std::strlen(gb_last_error()) > 0);
}

TEST_CASE("argument validation") {
    CHECK(gb_track_default(nullptr) == GB_ERR_INVALID_ARGUMENT);
    CHECK(gb_env_create(nullptr, 0, nullptr) == GB_ERR_INVALID_ARGUMENT);
    CHECK(gb_generate_cohort(nullptr, nullptr) == GB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("environment stepping and discretization") {
    gb_track* track = nullptr;
    REQUIRE(gb_track_default(&track) == GB_OK);
    gb_env* env = nullptr;
    REQUIRE(gb_env_create(track, 7, &env) == GB_OK);

    CHECK(gb_env_score(env) == 0);
    CHECK(gb_env_lap(env) == 1);
    CHECK(gb_env_finished(env) == 0);
    CHECK(gb_env_elapsed_s(env) == 0.0);

    CHECK(gb_env_step(env, 0, 1) == GB_OK);
    CHECK(gb_env_window_index(env) == 1);
    CHECK(gb_env_elapsed_s(env) == doctest::Approx(0.25));

    double feats[GB_FEATURE_COUNT];
    CHECK(gb_env_features(env, feats, GB_FEATURE_COUNT) == GB_OK);
    CHECK(feats[3] > 0.0);  // speed after one full-gas window
    CHECK(gb_env_features(env, feats, 4) == GB_ERR_INVALID_ARGUMENT);

    int lap = 0, sub = -1, speed = -1, rot = -1, prox = -1;
    CHECK(gb_env_cell_key(env, &lap, &sub, &speed, &rot, &prox) == GB_OK);
    CHECK(lap == 1);
    CHECK(sub >= 0);
    CHECK(sub < 76);
    CHECK((speed == 0 || speed == 1));
    CHECK(rot >= 0);
    CHECK(rot <= 5);

    CHECK(gb_env_step(env, 2, 0) == GB_ERR_CONTRACT);

    gb_env_free(env);
    gb_track_free(track);
}

TEST_CASE("snapshot round trip through the C surface") {
    gb_track* track = nullptr;
    REQUIRE(gb_track_default(&track) == GB_OK);
    gb_env* env = nullptr;
    REQUIRE(gb_env_create(track, 3, &env) == GB_OK);
    for (int i = 0; i < 20; ++i) REQUIRE(gb_env_step(env, (i % 3) - 1, 1) == GB_OK);

    uint8_t* blob = nullptr;
    size_t len = 0;
    REQUIRE(gb_env_snapshot(env, &blob, &len) == GB_OK);
    REQUIRE(blob != nullptr);
    REQUIRE(len > 0);

    const int score = gb_env_score(env);
    const int window = gb_env_window_index(env);
    for (int i = 0; i < 5; ++i) REQUIRE(gb_env_step(env, 0, 1) == GB_OK);
    CHECK(gb_env_window_index(env) == window + 5);

    CHECK(gb_env_restore(env, blob, len) == GB_OK);
    CHECK(gb_env_score(env) == score);
    CHECK(gb_env_window_index(env) == window);

    // Corrupt the magic: parse error.
    blob[0] ^= 0xFF;
    CHECK(gb_env_restore(env, blob, len) == GB_ERR_PARSE);
    gb_buffer_free(blob);
    gb_env_free(env);
    gb_track_free(track);
}

TEST_CASE("pipeline end to end at a tiny scale") {
    const std::string config = small_config_path();
    const auto dir = work_dir();
    const std::string dataset = (dir / "dataset.csv").string();
    const std::string personas = (dir / "personas").string();
    const std::string run_dir = (dir / "run_winner").string();
    const std::string svg = (dir / "trace.svg").string();

    REQUIRE(gb_generate_cohort(config.c_str(), dataset.c_str()) == GB_OK);
    CHECK(fs::exists(dataset));

    REQUIRE(gb_cluster_personas(config.c_str(), dataset.c_str(), personas.c_str()) == GB_OK);
    CHECK(fs::exists(fs::path(personas) / "dendrogram.csv"));
    CHECK(fs::exists(fs::path(personas) / "assignments.csv"));
    int persona_files = 0;
    for (const auto& e : fs::directory_iterator(personas)) {
        if (e.path().filename().string().rfind("persona_", 0) == 0) ++persona_files;
    }
    CHECK(persona_files >= 1);

    REQUIRE(gb_explore(config.c_str(), dataset.c_str(), "winner", -1.0, 1, 200, 0, nullptr,
                       run_dir.c_str()) == GB_OK);
    CHECK(fs::exists(fs::path(run_dir) / "best.json"));
    CHECK(fs::exists(fs::path(run_dir) / "archive.csv"));
    CHECK(fs::exists(fs::path(run_dir) / "progress.csv"));
    CHECK(fs::exists(fs::path(run_dir) / "resolved_config.json"));
    CHECK(fs::exists(fs::path(run_dir) / "diagnostics.txt"));

    REQUIRE(gb_render_trace((fs::path(run_dir) / "best.json").string().c_str(), config.c_str(),
                            svg.c_str()) == GB_OK);
    std::ifstream s(svg);
    std::string content((std::istreambuf_iterator<char>(s)), std::istreambuf_iterator<char>());
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("<circle") != std::string::npos);

    // A persona-guided exploration with explicit overrides.
    std::string persona_file;
    for (const auto& e : fs::directory_iterator(personas)) {
        if (e.path().filename().string().rfind("persona_", 0) == 0) {
            persona_file = e.path().string();
            break;
        }
    }
    REQUIRE(!persona_file.empty());
    const std::string run2 = (dir / "run_persona").string();
    REQUIRE(gb_explore(config.c_str(), dataset.c_str(), persona_file.c_str(), 0.5, 2, 150, 3,
                       "dudani", run2.c_str()) == GB_OK);
    CHECK(fs::exists(fs::path(run2) / "best.json"));

    // Bad persona path surfaces as an IO error with a message.
    CHECK(gb_explore(config.c_str(), dataset.c_str(), "/nonexistent/persona.txt", 0.5, 1, 100, 0,
                     nullptr, (dir / "run_bad").string().c_str()) == GB_ERR_IO);
    CHECK(std::strlen(gb_last_error()) > 0);
}
