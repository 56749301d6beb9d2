#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "common/errors.hpp"
#include "harness/config.hpp"
#include "harness/experiments.hpp"
#include "harness/report.hpp"
#include "harness/stats.hpp"
#include "harness/svg.hpp"
#include "traces/generator.hpp"

using namespace goblend;
using namespace goblend::harness;

namespace {

const racing::TrackLayout& track() {
    static const racing::TrackLayout t = racing::default_track();
    return t;
}

std::filesystem::path temp_dir(const char* leaf) {
    auto p = std::filesystem::temp_directory_path() / leaf;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::vector<std::string> sorted_lines(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) lines.push_back(line);
    std::sort(lines.begin(), lines.end());
    return lines;
}

}  // namespace

TEST_CASE("stationary trajectory statistics") {
    const std::vector<racing::Action> idle(100, racing::Action{0, 0});
    const InGameStatistics s = compute_stats(track(), 1, idle);
    CHECK(s.final_score == 0);
    CHECK(s.average_speed == 0.0);
    CHECK_FALSE(s.lap1_time_s.has_value());
    CHECK(s.off_road_pct == 0.0);
    CHECK(s.trace_length == 100);
    CHECK_THROWS_AS(compute_stats(track(), 1, {}), ContractError);
}

TEST_CASE("short straight run stays on the road") {
    const std::vector<racing::Action> straight(20, racing::Action{0, 1});
    const InGameStatistics s = compute_stats(track(), 1, straight);
    CHECK(s.off_road_pct == 0.0);
    CHECK(s.average_speed > 0.0);
}

TEST_CASE("full two-lap run reports window-resolution lap time") {
    traces::GeneratorConfig cfg = traces::GeneratorConfig::defaults();
    const traces::PlaySession s = traces::generate_session(track(), traces::SkillTier::Expert,
                                                           5000, cfg);
    REQUIRE(s.final_score() == 16);
    std::vector<racing::Action> actions;
    for (const auto& w : s.windows) actions.push_back(w.action);

    const InGameStatistics stats = compute_stats(track(), 5000, actions);
    CHECK(stats.final_score == 16);
    REQUIRE(stats.lap1_time_s.has_value());
    // elapsed at the window that crossed the 8th gate, i.e. windows / 4.
    int lap1_window = -1;
    for (std::size_t i = 0; i < s.windows.size(); ++i) {
        if (static_cast<int>(s.windows[i].features[racing::kFeatScore]) >= 8) {
            lap1_window = static_cast<int>(i) + 1;
            break;
        }
    }
    CHECK(*stats.lap1_time_s == doctest::Approx(lap1_window / 4.0));
    CHECK(stats.trace_length == static_cast<int>(actions.size()));
}

TEST_CASE("student t quantiles match table values") {
    CHECK(student_t_quantile(2, 0.975) == doctest::Approx(4.30265272991).epsilon(1e-9));
    CHECK(student_t_quantile(9, 0.975) == doctest::Approx(2.262157163).epsilon(1e-9));
    CHECK_THROWS_AS(student_t_quantile(0, 0.975), ValidationError);
}

TEST_CASE("mean and confidence interval") {
    const MeanCi m = mean_ci({1.0, 2.0, 3.0});
    CHECK(m.mean == doctest::Approx(2.0));
    CHECK(m.ci == doctest::Approx(4.302652729911275 / std::sqrt(3.0)).epsilon(1e-9));
    const MeanCi single = mean_ci({5.0});
    CHECK(single.mean == 5.0);
    CHECK(single.ci == 0.0);
    CHECK_THROWS_AS(mean_ci({}), ValidationError);
}

TEST_CASE("a single-member persona rates its own play at 1") {
    traces::GeneratorConfig cfg = traces::GeneratorConfig::defaults();
    traces::Dataset dataset;
    dataset.push_back(traces::generate_session(track(), traces::SkillTier::Advanced, 6000, cfg));
    personas::PersonaModel p = personas::build_persona({&dataset[0]});
    p.label = "solo";
    const affect::AffectIndex index(dataset, p, 5, affect::Weighting::Dudani);

    std::vector<racing::Action> actions;
    for (const auto& w : dataset[0].windows) actions.push_back(w.action);
    const RewardPair r = compare_rewards(track(), dataset[0].seed, actions, p, index);
    CHECK(r.r_behavior == 1.0);
    CHECK(r.r_experience > 0.9);
}

TEST_CASE("matrix spec enumeration") {
    std::vector<personas::PersonaModel> ps(4);
    ps[0].label = "expert";
    ps[1].label = "advanced";
    ps[2].label = "intermediate";
    ps[3].label = "beginner";
    Config cfg;
    const auto specs = matrix_specs(ps, cfg);
    CHECK(specs.size() == 14);  // 4 personas x 3 lambdas + 2 baselines
    CHECK(specs.back().id == "random");
    CHECK(specs[specs.size() - 2].id == "winner");
    CHECK(specs[0].id == "expert_l0");
}

TEST_CASE("aggregation is recomputable from per-seed rows") {
    ExperimentResult r;
    r.spec = {"expert_l0", ExperimentKind::PersonaLambda, "expert", 0.0};
    for (int i = 0; i < 3; ++i) {
        SeedRun run;
        run.seed = static_cast<std::uint64_t>(i + 1);
        run.actions = {{0, 1}};
        run.stats.final_score = 14 + i;
        run.stats.lap1_time_s = 50.0 + i;
        run.stats.average_speed = 30.0;
        run.stats.mean_nearest_opponent = 400.0;
        run.stats.off_road_pct = 5.0;
        run.stats.crash_pct = 10.0;
        run.stats.trace_length = 400;
        run.rewards["expert"] = {0.9 - 0.1 * i, 0.8};
        r.runs.push_back(run);
    }
    const AggregateRow row = aggregate_experiment(r);
    CHECK(row.final_score.mean == doctest::Approx(15.0));
    CHECK(row.final_score.ci == doctest::Approx(4.302652729911275 / std::sqrt(3.0)).epsilon(1e-9));
    REQUIRE(row.lap1_time_s.has_value());
    CHECK(row.lap1_time_s->mean == doctest::Approx(51.0));
    CHECK(row.r_behavior.mean == doctest::Approx(0.8));

    // Drop one lap-1 time: the aggregate reports it as absent.
    r.runs[1].stats.lap1_time_s.reset();
    CHECK_FALSE(aggregate_experiment(r).lap1_time_s.has_value());
}

TEST_CASE("export, import and recomputed results agree") {
    std::vector<ExperimentResult> results(2);
    results[0].spec = {"expert_l0", ExperimentKind::PersonaLambda, "expert", 0.0};
    results[1].spec = {"random", ExperimentKind::Random, "", 0.0};
    for (int e = 0; e < 2; ++e) {
        for (int i = 0; i < 2; ++i) {
            SeedRun run;
            run.seed = static_cast<std::uint64_t>(i + 1);
            run.actions = {{0, 1}, {1, 0}, {-1, -1}};
            run.arousal_trace = {0.2, 0.5, 0.8};
            run.stats.final_score = 3 * e + i;
            if (e == 0) run.stats.lap1_time_s = 44.25;
            run.stats.average_speed = 20.0 + i;
            run.stats.mean_nearest_opponent = 300.0;
            run.stats.off_road_pct = 2.0;
            run.stats.crash_pct = 7.5;
            run.stats.trace_length = 3;
            run.rewards["expert"] = {0.5 + 0.1 * i, 0.6};
            if (e == 1) run.rewards["beginner"] = {0.3, 0.4};
            results[static_cast<std::size_t>(e)].runs.push_back(run);
        }
    }

    const auto dir = temp_dir("goblend_test_export");
    export_results(results, Config{}, dir.string());
    CHECK(std::filesystem::exists(dir / "results.csv"));
    CHECK(std::filesystem::exists(dir / "rewards.csv"));
    CHECK(std::filesystem::exists(dir / "resolved_config.json"));
    CHECK(std::filesystem::exists(dir / "per_seed" / "expert_l0_seed1.json"));

    const auto imported = import_results(dir.string());
    REQUIRE(imported.size() == 2);
    const auto recomputed = (dir / "recomputed.csv").string();
    write_results_csv(imported, recomputed);
    CHECK(sorted_lines(recomputed) == sorted_lines((dir / "results.csv").string()));

    // Round-tripped runs carry their action logs intact.
    for (const auto& r : imported) {
        for (const auto& run : r.runs) {
            CHECK(run.actions.size() == 3);
            CHECK(run.arousal_trace.size() == 3);
        }
    }
}

TEST_CASE("svg rendering carries one vertex and one marker per window") {
    std::vector<Vec2> positions;
    std::vector<double> arousal;
    for (int i = 0; i < 40; ++i) {
        positions.push_back({static_cast<double>(i), 0.0});
        arousal.push_back(i == 25 ? 1.0 : (i == 10 ? 0.0 : 0.5));
    }
    const std::string svg = render_trace_svg(track(), positions, arousal);

    std::size_t circles = 0, at = 0;
    while ((at = svg.find("<circle", at)) != std::string::npos) {
        ++circles;
        ++at;
    }
    CHECK(circles == positions.size());

    // The polyline lists one vertex per window.
    const auto poly_start = svg.find("<polyline");
    REQUIRE(poly_start != std::string::npos);
    const auto points_start = svg.find("points=\"", poly_start) + 8;
    const auto points_end = svg.find('"', points_start);
    const std::string points = svg.substr(points_start, points_end - points_start);
    std::size_t vertices = 0;
    for (char c : points) {
        if (c == ',') ++vertices;
    }
    CHECK(vertices == positions.size());

    // Max arousal renders pure red, min pure blue.
    std::vector<std::string> fills;
    at = 0;
    while ((at = svg.find("<circle", at)) != std::string::npos) {
        const auto f = svg.find("fill=\"", at) + 6;
        fills.push_back(svg.substr(f, 7));
        ++at;
    }
    REQUIRE(fills.size() == 40);
    CHECK(fills[25] == "#ff0000");
    CHECK(fills[10] == "#0000ff");
}

TEST_CASE("config round trips through json") {
    Config c;
    c.iterations = 1234;
    c.cluster_cut_threshold = 17.5;
    c.seeds = {4, 5};
    c.lambdas = {0.25, 0.75};
    c.knn_k = 7;
    c.knn_weighting = affect::Weighting::InverseDistance;
    c.generator.cohort_sizes[traces::SkillTier::Expert] = 3;
    c.generator.drivers[traces::SkillTier::Beginner].speed_fraction = 0.41;

    const auto dir = temp_dir("goblend_test_config");
    const auto path = (dir / "config.json").string();
    save_config(c, path);
    const Config back = load_config(path);
    CHECK(back.iterations == 1234);
    CHECK(back.cluster_cut_threshold == 17.5);
    CHECK(back.seeds == std::vector<std::uint64_t>{4, 5});
    CHECK(back.lambdas == std::vector<double>{0.25, 0.75});
    CHECK(back.knn_k == 7);
    CHECK(back.knn_weighting == affect::Weighting::InverseDistance);
    CHECK(back.generator.cohort_sizes.at(traces::SkillTier::Expert) == 3);
    CHECK(back.generator.drivers.at(traces::SkillTier::Beginner).speed_fraction == 0.41);

    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), IoError);
    std::ofstream bad(dir / "bad.json");
    bad << "{ not json";
    bad.close();
    CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ParseError);
}

TEST_CASE("tiny matrix run produces a complete grid") {
    // Deliberately small: 2 sessions per tier, 150 iterations, 2 seeds.
    traces::GeneratorConfig gen = traces::GeneratorConfig::defaults();
    gen.cohort_sizes = {{traces::SkillTier::Expert, 2},
                        {traces::SkillTier::Advanced, 2},
                        {traces::SkillTier::Intermediate, 2},
                        {traces::SkillTier::Beginner, 2}};
    const traces::Dataset dataset = traces::generate_cohort(track(), gen);

    std::vector<personas::PersonaModel> ps;
    ps.push_back(personas::build_persona({&dataset[0], &dataset[1]}));
    ps[0].label = "expert";
    ps.push_back(personas::build_persona({&dataset[6], &dataset[7]}));
    ps[1].label = "beginner";

    Config cfg;
    cfg.iterations = 150;
    cfg.seeds = {1, 2};
    cfg.lambdas = {0.0, 1.0};
    cfg.parallel_runs = 2;

    const auto results = run_matrix(track(), dataset, ps, cfg);
    CHECK(results.size() == 2 * 2 + 2);
    for (const auto& r : results) {
        CHECK(r.runs.size() == 2);
        for (const auto& run : r.runs) {
            CHECK_FALSE(run.actions.empty());
            CHECK(run.stats.trace_length == static_cast<int>(run.actions.size()));
            if (r.spec.kind == ExperimentKind::PersonaLambda) {
                CHECK(run.rewards.count(r.spec.persona_label) == 1);
            } else {
                CHECK(run.rewards.size() == ps.size());
            }
        }
    }

    // Reruns with the same seeds reproduce the per-seed rows.
    const auto again = run_experiment(track(), dataset, ps, cfg, results[0].spec);
    CHECK(again.runs[0].actions == results[0].runs[0].actions);
    CHECK(again.runs[0].stats.final_score == results[0].runs[0].stats.final_score);
}
