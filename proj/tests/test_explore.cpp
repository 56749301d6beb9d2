#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "explore/archive.hpp"
#include "explore/explorer.hpp"
#include "explore/reward.hpp"
#include "traces/generator.hpp"

using namespace goblend;
using namespace goblend::explore;

namespace {

// Independent oracle for the trace-similarity reward; deliberately written
// as the naive summation.
double naive_similarity(const std::vector<double>& h, const std::vector<double>& t) {
    double total = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double target = i < t.size() ? t[i] : t.back();
        total += (1.0 - std::fabs(h[i] - target)) * (1.0 - std::fabs(h[i] - target));
    }
    return total / static_cast<double>(h.size());
}

const racing::TrackLayout& track() {
    static const racing::TrackLayout t = racing::default_track();
    return t;
}

struct BlendFixture {
    traces::Dataset dataset;
    personas::PersonaModel persona;
    std::unique_ptr<affect::AffectIndex> index;
    ActionTable table;

    BlendFixture() {
        traces::GeneratorConfig cfg = traces::GeneratorConfig::defaults();
        dataset.push_back(traces::generate_session(track(), traces::SkillTier::Expert, 700, cfg));
        dataset.push_back(traces::generate_session(track(), traces::SkillTier::Expert, 701, cfg));
        dataset.push_back(traces::generate_session(track(), traces::SkillTier::Advanced, 702, cfg));
        std::vector<const traces::PlaySession*> members{&dataset[0], &dataset[1]};
        persona = personas::build_persona(members);
        persona.label = "expert";
        index = std::make_unique<affect::AffectIndex>(dataset, persona, 5,
                                                      affect::Weighting::Dudani);
        table = traces::action_frequency_table(dataset);
    }
};

Trajectory make_trajectory(std::size_t len, double r_seed) {
    Trajectory t;
    std::vector<double> tb(1, 0.5), te(1, 0.5);
    Rng rng(static_cast<std::uint64_t>(r_seed * 1000));
    for (std::size_t i = 0; i < len; ++i) {
        t.extend({0, 1}, std::min(1.0, r_seed), std::min(1.0, r_seed), tb, te);
    }
    return t;
}

}  // namespace

TEST_CASE("trace similarity on hand examples") {
    CHECK(trace_similarity({0.25, 0.5, 0.75}, {0.25, 0.5, 0.75}) == 1.0);
    CHECK(trace_similarity({0.5}, {1.0}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(trace_similarity({0.0, 1.0}, {1.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(trace_similarity({}, {0.5}), ValidationError);
    CHECK_THROWS_AS(trace_similarity({1.5}, {0.5}), ValidationError);
    CHECK_THROWS_AS(trace_similarity({0.5}, {-0.1}), ValidationError);
}

TEST_CASE("trace similarity matches the naive oracle on 1000 random pairs") {
    Rng rng(808);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng.index(480);
        const std::size_t m = 1 + rng.index(480);
        std::vector<double> h(n), t(m);
        for (auto& v : h) v = rng.unit();
        for (auto& v : t) v = rng.unit();
        const double got = trace_similarity(h, t);
        const double want = naive_similarity(h, t);
        REQUIRE(std::fabs(got - want) <= 1e-12);
        REQUIRE(got >= 0.0);
        REQUIRE(got <= 1.0);
    }
}

TEST_CASE("target clamps to its final value past its end") {
    const std::vector<double> target{0.0, 0.5, 1.0};
    CHECK(target_at(target, 0) == 0.0);
    CHECK(target_at(target, 2) == 1.0);
    CHECK(target_at(target, 400) == 1.0);
    CHECK(trace_similarity({1.0, 1.0, 1.0, 1.0, 1.0}, {1.0}) == 1.0);
}

TEST_CASE("blend arithmetic") {
    CHECK(blend(0.9, 0.3, 0.0) == 0.3);
    CHECK(blend(0.9, 0.3, 1.0) == 0.9);
    CHECK(blend(0.8, 0.6, 0.5) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("action sampling follows the table") {
    Rng rng(55);
    ActionTable sure{};
    sure[racing::action_index({1, -1})] = 1.0;
    for (int i = 0; i < 50; ++i) {
        const racing::Action a = sample_action(sure, rng);
        CHECK(a.steer == 1);
        CHECK(a.gas == -1);
    }

    ActionTable uniform{};
    uniform.fill(1.0 / racing::kActionCount);
    std::array<int, racing::kActionCount> counts{};
    const int draws = 9000;
    for (int i = 0; i < draws; ++i) {
        counts[static_cast<std::size_t>(racing::action_index(sample_action(uniform, rng)))]++;
    }
    const double expected = draws / 9.0;
    const double sigma = std::sqrt(draws * (1.0 / 9.0) * (8.0 / 9.0));
    for (int c : counts) CHECK(std::fabs(c - expected) <= 3.0 * sigma);

    ActionTable bad{};
    bad.fill(0.2);
    CHECK_THROWS_AS(sample_action(bad, rng), ValidationError);
}

TEST_CASE("uniform cell selection") {
    Archive archive;
    Rng rng(9);
    CHECK_THROWS_AS(select_cell(archive, rng), ValidationError);

    const racing::GameState st = racing::reset(track(), 1);
    for (int i = 0; i < 4; ++i) {
        racing::CellKey key;
        key.sub_segment = static_cast<std::int16_t>(i);
        archive.offer(key, 0.0, Trajectory{}, 0.0, 0.0, 0, 0, track(), st);
    }
    REQUIRE(archive.size() == 4);

    std::array<int, 4> counts{};
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) counts[select_cell(archive, rng)]++;
    const double sigma = std::sqrt(draws * 0.25 * 0.75);
    for (int c : counts) CHECK(std::fabs(c - draws / 4.0) <= 3.0 * sigma);

    Rng r1(33), r2(33);
    for (int i = 0; i < 100; ++i) CHECK(select_cell(archive, r1) == select_cell(archive, r2));
}

TEST_CASE("archive replacement criteria") {
    Archive archive;
    const racing::GameState st = racing::reset(track(), 1);
    racing::CellKey key;
    key.sub_segment = 3;

    CHECK(archive.offer(key, 0.5, make_trajectory(10, 0.5), 0.5, 0.5, 1, 1, track(), st) ==
          OfferOutcome::Inserted);
    CHECK(archive.size() == 1);

    SUBCASE("higher reward replaces") {
        CHECK(archive.offer(key, 0.6, make_trajectory(12, 0.6), 0.6, 0.6, 2, 2, track(), st) ==
              OfferOutcome::ReplacedBetter);
        CHECK(archive.find(key)->r_lambda == 0.6);
        CHECK(archive.replacements() == 1);
    }
    SUBCASE("lower reward is rejected") {
        CHECK(archive.offer(key, 0.4, make_trajectory(2, 0.4), 0.4, 0.4, 0, 2, track(), st) ==
              OfferOutcome::Rejected);
        CHECK(archive.find(key)->r_lambda == 0.5);
    }
    SUBCASE("equal reward needs a strictly shorter trajectory") {
        CHECK(archive.offer(key, 0.5, make_trajectory(10, 0.5), 0.5, 0.5, 1, 2, track(), st) ==
              OfferOutcome::Rejected);
        CHECK(archive.offer(key, 0.5, make_trajectory(11, 0.5), 0.5, 0.5, 1, 2, track(), st) ==
              OfferOutcome::Rejected);
        CHECK(archive.offer(key, 0.5 + 4e-13, make_trajectory(7, 0.5), 0.5, 0.5, 1, 2, track(),
                            st) == OfferOutcome::ReplacedShorter);
        CHECK(archive.find(key)->trajectory.length() == 7);
    }
}

TEST_CASE("first iterations grow the archive consistently") {
    BlendFixture fx;
    ExplorationConfig cfg;
    cfg.iterations = 50;
    cfg.lambda = 0.5;
    cfg.seed = 4;
    cfg.replay_check_fraction = 1.0;  // assert restore == replay on every pick

    Archive archive;
    const racing::GameState st = racing::reset(track(), cfg.seed);
    archive.offer(racing::discretize(track(), st), 0.0, Trajectory{}, 0.0, 0.0, st.score, 0,
                  track(), st);
    Rng rng(splitmix64(cfg.seed));
    const std::size_t before = archive.size();
    for (std::int64_t it = 1; it <= cfg.iterations; ++it) {
        explore_step(archive, track(), &fx.persona, fx.index.get(), fx.table, cfg, rng, it);
    }
    CHECK(archive.size() > before);
    CHECK(archive.size() <= static_cast<std::size_t>(track().cell_key_space()));
    for (const auto& e : archive.entries()) {
        CHECK(e.r_lambda >= 0.0);
        CHECK(e.r_lambda <= 1.0);
        CHECK(e.trajectory.h_behavior.size() == e.trajectory.length());
        CHECK(e.trajectory.h_experience.size() == e.trajectory.length());
    }
}

TEST_CASE("exploration is reproducible for a fixed seed") {
    BlendFixture fx;
    ExplorationConfig cfg;
    cfg.iterations = 300;
    cfg.lambda = 0.5;
    cfg.seed = 11;
    cfg.progress_every = 100;

    const auto a = run_exploration(track(), &fx.persona, fx.index.get(), fx.table, cfg);
    const auto b = run_exploration(track(), &fx.persona, fx.index.get(), fx.table, cfg);
    CHECK(a.archive.size() == b.archive.size());
    CHECK(a.best.trajectory.actions == b.best.trajectory.actions);
    CHECK(a.best.r_lambda == b.best.r_lambda);
    CHECK(a.best.key == b.best.key);
    CHECK(a.progress.size() == b.progress.size());
}

TEST_CASE("every archived entry survives replay verification") {
    BlendFixture fx;
    ExplorationConfig cfg;
    cfg.iterations = 400;
    cfg.lambda = 1.0;
    cfg.seed = 21;

    const auto result = run_exploration(track(), &fx.persona, fx.index.get(), fx.table, cfg);
    for (const auto& e : result.archive.entries()) {
        if (e.trajectory.length() == 0) continue;  // reset seed cell
        verify_entry_replay(track(), cfg.seed, e, &fx.persona, fx.index.get());
    }
}

TEST_CASE("raw-score mode pushes the score upward") {
    BlendFixture fx;
    ExplorationConfig cfg;
    cfg.iterations = 4000;
    cfg.seed = 2;
    cfg.mode = RewardMode::RawScore;

    const auto result = run_exploration(track(), nullptr, nullptr, fx.table, cfg);
    CHECK(result.best.raw_score >= 2);
    CHECK(result.best.r_lambda ==
          doctest::Approx(result.best.raw_score / 16.0).epsilon(1e-12));
    // Raw-score runs cache a zero experience trace of matching length.
    CHECK(result.best.trajectory.h_experience.size() == result.best.trajectory.length());
    for (const auto& e : result.archive.entries()) {
        if (e.trajectory.length() == 0) continue;
        verify_entry_replay(track(), cfg.seed, e, nullptr, nullptr);
    }
}

TEST_CASE("multi-worker runs keep the archive invariants") {
    BlendFixture fx;
    ExplorationConfig cfg;
    cfg.iterations = 600;
    cfg.seed = 31;
    cfg.mode = RewardMode::RawScore;
    cfg.workers = 2;

    const auto result = run_exploration(track(), nullptr, nullptr, fx.table, cfg);
    CHECK(result.archive.size() <= static_cast<std::size_t>(track().cell_key_space()));
    for (const auto& e : result.archive.entries()) {
        CHECK(e.r_lambda >= 0.0);
        CHECK(e.r_lambda <= 1.0);
        if (e.trajectory.length() == 0) continue;
        verify_entry_replay(track(), cfg.seed, e, nullptr, nullptr);
    }
}

TEST_CASE("archive dump writes a row and an action log per entry") {
    BlendFixture fx;
    ExplorationConfig cfg;
    cfg.iterations = 60;
    cfg.seed = 3;
    cfg.mode = RewardMode::RawScore;
    const auto result = run_exploration(track(), nullptr, nullptr, fx.table, cfg);

    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "goblend_test_dump";
    fs::remove_all(dir);
    dump_archive(result.archive, dir.string());

    std::ifstream f(dir / "archive.csv");
    REQUIRE(f.good());
    std::string line;
    std::getline(f, line);
    int rows = 0;
    while (std::getline(f, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == static_cast<int>(result.archive.size()));
    int logs = 0;
    for (const auto& e : fs::directory_iterator(dir / "actions")) {
        (void)e;
        ++logs;
    }
    CHECK(logs == rows);

    save_progress_csv(result.progress, (dir / "progress.csv").string());
    CHECK(fs::exists(dir / "progress.csv"));
}
