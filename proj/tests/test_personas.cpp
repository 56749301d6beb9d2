#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "personas/aggregate.hpp"
#include "personas/persona.hpp"
#include "personas/ward.hpp"
#include "traces/generator.hpp"

using namespace goblend;
using namespace goblend::personas;
using goblend::traces::Dataset;
using goblend::traces::GeneratorConfig;
using goblend::traces::PlaySession;
using goblend::traces::SkillTier;

namespace {

const racing::TrackLayout& track() {
    static const racing::TrackLayout t = racing::default_track();
    return t;
}

// A hand-built session with a known score trace; score hits `final_score`
// at window `finish` and holds.
PlaySession fixture_session(const std::string& id, int final_score, int finish, int length) {
    PlaySession s;
    s.session_id = id;
    for (int i = 0; i < length; ++i) {
        traces::SessionWindow w;
        const double frac = std::min(1.0, static_cast<double>(i) / finish);
        w.features[racing::kFeatScore] = std::floor(frac * final_score);
        w.features[racing::kFeatSpeed] = 10.0;
        w.action = {0, 1};
        s.windows.push_back(w);
        s.arousal.push_back(0.25 + 0.5 * frac);
    }
    return s;
}

std::vector<std::vector<double>> to_rows(const std::vector<std::array<double, 2>>& pts) {
    std::vector<std::vector<double>> rows;
    for (const auto& p : pts) rows.push_back({p[0], p[1]});
    return rows;
}

}  // namespace

TEST_CASE("session aggregation picks out the expected summary") {
    const PlaySession s = fixture_session("f0", 16, 100, 120);
    const AggregateVector v = aggregate(s);
    CHECK(v[kAggMaxScore] == 16.0);
    CHECK(v[kAggCrashCount] == 0.0);
    CHECK(v[kAggOffRoadCount] == 0.0);
    CHECK(v[kAggMeanSpeed] == doctest::Approx(10.0));
    CHECK(v[kAggLength] == 120.0);

    const PlaySession t = fixture_session("f1", 16, 100, 120);
    CHECK(aggregate(t) == v);

    PlaySession empty;
    CHECK_THROWS_AS(aggregate(empty), ValidationError);
}

TEST_CASE("two-point ward merge lands at half the squared distance") {
    const auto d = ward_cluster(to_rows({{0.0, 0.0}, {2.0, 0.0}}));
    REQUIRE(d.merges.size() == 1);
    CHECK(d.merges[0].height == doctest::Approx(2.0).epsilon(1e-12));  // 4 / 2
    CHECK(d.merges[0].cluster_a == 0);
    CHECK(d.merges[0].cluster_b == 1);
    CHECK(d.merges[0].merged_size == 2);
}

TEST_CASE("tight pairs merge before anything else") {
    // Two well-separated pairs; brute force over pairings says the first two
    // merges must be the within-pair ones.
    const auto d = ward_cluster(to_rows({{0.0, 0.0}, {0.1, 0.0}, {10.0, 10.0}, {10.1, 10.0}}));
    REQUIRE(d.merges.size() == 3);
    CHECK(d.merges[0].cluster_a == 0);
    CHECK(d.merges[0].cluster_b == 1);
    CHECK(d.merges[1].cluster_a == 2);
    CHECK(d.merges[1].cluster_b == 3);
    CHECK(d.merges[2].height > d.merges[1].height);
}

TEST_CASE("ward rejects NaN input") {
    CHECK_THROWS_AS(ward_cluster(to_rows({{0.0, std::nan("")}, {1.0, 0.0}})), ValidationError);
    CHECK_THROWS_AS(ward_cluster({}), ValidationError);
}

TEST_CASE("ward heights are non-decreasing on random data") {
    Rng rng(2024);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 60; ++i) {
        rows.push_back({rng.unit() * 4.0, rng.unit() * 4.0, rng.unit() * 4.0});
    }
    const auto d = ward_cluster(rows);
    for (std::size_t i = 1; i < d.merges.size(); ++i) {
        CHECK(d.merges[i].height >= d.merges[i - 1].height - 1e-12);
    }
}

TEST_CASE("permuting the input only relabels the dendrogram") {
    Rng rng(11);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 24; ++i) {
        rows.push_back({rng.unit() * 3.0, rng.unit() * 3.0});
    }
    std::vector<std::size_t> perm(rows.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.index(i)]);
    }
    std::vector<std::vector<double>> shuffled(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) shuffled[i] = rows[perm[i]];

    const auto d0 = ward_cluster(rows);
    const auto d1 = ward_cluster(shuffled);

    std::vector<double> h0, h1;
    for (const auto& m : d0.merges) h0.push_back(m.height);
    for (const auto& m : d1.merges) h1.push_back(m.height);
    for (std::size_t i = 0; i < h0.size(); ++i) CHECK(h0[i] == doctest::Approx(h1[i]).epsilon(1e-9));

    // Same partition at an arbitrary mid threshold, up to relabeling.
    const double T = h0[h0.size() / 2] + 1e-9;
    const auto c0 = cut(d0, T);
    const auto c1 = cut(d1, T);
    std::vector<int> c1_unpermuted(c1.size());
    for (std::size_t i = 0; i < perm.size(); ++i) c1_unpermuted[perm[i]] = c1[i];
    CHECK(adjusted_rand_index(c0, c1_unpermuted) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cut thresholds at the extremes") {
    Rng rng(5);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 12; ++i) rows.push_back({rng.unit(), rng.unit()});
    const auto d = ward_cluster(rows);

    const double above_root = d.merges.back().height + 1.0;
    const auto one = cut(d, above_root);
    CHECK(*std::max_element(one.begin(), one.end()) == 0);

    const double below_first = d.merges.front().height * 0.5;
    const auto singletons = cut(d, below_first > 0 ? below_first : 1e-30);
    CHECK(*std::max_element(singletons.begin(), singletons.end()) ==
          static_cast<int>(rows.size()) - 1);

    // Every leaf appears in exactly one cluster with dense labels.
    const auto mid = cut(d, d.merges[d.merges.size() / 2].height + 1e-9);
    CHECK(mid.size() == rows.size());
    const int k = *std::max_element(mid.begin(), mid.end()) + 1;
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int label : mid) {
        REQUIRE(label >= 0);
        REQUIRE(label < k);
        counts[static_cast<std::size_t>(label)]++;
    }
    for (int c : counts) CHECK(c > 0);

    CHECK_THROWS_AS(cut(d, 0.0), ValidationError);
}

TEST_CASE("adjusted rand index on a hand example") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(-0.5));
}

TEST_CASE("single-member persona carries that member's traces") {
    const PlaySession s = fixture_session("solo", 16, 200, 250);
    const PersonaModel p = build_persona({&s});
    REQUIRE(p.target_score.size() == 480);
    REQUIRE(p.target_arousal.size() == 480);
    CHECK(p.member_count == 1);
    CHECK(p.mean_final_score == 16.0);
    for (std::size_t i = 0; i < 480; ++i) {
        const std::size_t j = std::min<std::size_t>(i, s.windows.size() - 1);
        CHECK(p.target_score[i] ==
              s.windows[j].features[racing::kFeatScore] / racing::kMaxScore);
        CHECK(p.target_arousal[i] == s.arousal[j]);
    }
}

TEST_CASE("members finishing early hold their final value") {
    const PlaySession a = fixture_session("a", 16, 150, 300);
    const PlaySession b = fixture_session("b", 16, 250, 300);
    const PersonaModel p = build_persona({&a, &b});
    for (std::size_t i = 300; i < 480; ++i) CHECK(p.target_score[i] == 1.0);
    // Non-decreasing score target ending at the mean normalized final score.
    for (std::size_t i = 1; i < 480; ++i) CHECK(p.target_score[i] >= p.target_score[i - 1]);
    CHECK(p.target_score.back() == doctest::Approx(p.mean_final_score / 16.0));
    double freq_sum = 0.0;
    for (double f : p.action_freq) freq_sum += f;
    CHECK(freq_sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(build_persona({}), ValidationError);
}

TEST_CASE("small synthetic cohort recovers its four tiers") {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    cfg.cohort_sizes = {{SkillTier::Expert, 6},
                        {SkillTier::Advanced, 6},
                        {SkillTier::Intermediate, 6},
                        {SkillTier::Beginner, 6}};
    const Dataset dataset = traces::generate_cohort(track(), cfg);

    // Cut just below the 3-cluster merge so exactly 4 clusters remain.
    std::vector<AggregateVector> rows;
    for (const auto& s : dataset) rows.push_back(aggregate(s));
    const auto z = standardize(rows);
    std::vector<std::vector<double>> generic(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) generic[i].assign(z[i].begin(), z[i].end());
    const auto dendro = ward_cluster(generic);
    const double T = dendro.merges[dendro.merges.size() - 4].height + 1e-9;

    const auto outcome = cluster_personas(dataset, T);
    const int k = *std::max_element(outcome.assignment.begin(), outcome.assignment.end()) + 1;
    CHECK(k == 4);

    std::vector<int> truth;
    for (const auto& s : dataset) truth.push_back(static_cast<int>(*s.tier_hint));
    CHECK(adjusted_rand_index(outcome.assignment, truth) >= 0.9);

    REQUIRE(outcome.personas.size() == 4);
    CHECK(outcome.personas[0].label == "expert");
    CHECK(outcome.personas[1].label == "advanced");
    CHECK(outcome.personas[2].label == "intermediate");
    CHECK(outcome.personas[3].label == "beginner");
    for (std::size_t i = 1; i < outcome.personas.size(); ++i) {
        CHECK(outcome.personas[i - 1].mean_final_score >= outcome.personas[i].mean_final_score);
    }
}

TEST_CASE("persona artifacts round trip") {
    const PlaySession a = fixture_session("a", 12, 150, 480);
    const PlaySession b = fixture_session("b", 16, 250, 300);
    PersonaModel p = build_persona({&a, &b});
    p.label = "advanced";

    const auto dir = std::filesystem::temp_directory_path() / "goblend_test_personas";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "persona_advanced.txt").string();
    save_persona(p, path);
    const PersonaModel back = load_persona(path);
    CHECK(back.label == p.label);
    CHECK(back.member_ids == p.member_ids);
    CHECK(back.member_count == p.member_count);
    CHECK(back.mean_final_score == p.mean_final_score);
    CHECK(back.target_score == p.target_score);
    CHECK(back.target_arousal == p.target_arousal);
    CHECK(back.action_freq == p.action_freq);

    CHECK_THROWS_AS(load_persona((dir / "nope.txt").string()), IoError);
}

TEST_CASE("dendrogram csv export") {
    const auto d = ward_cluster(to_rows({{0, 0}, {1, 0}, {5, 5}}));
    const auto dir = std::filesystem::temp_directory_path() / "goblend_test_personas";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "dendro.csv").string();
    save_dendrogram_csv(d, path);
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    CHECK(line.find("goblend-dendrogram v1") != std::string::npos);
    std::getline(f, line);
    CHECK(line == "merge_index,cluster_a,cluster_b,height,merged_size");
    int rows = 0;
    while (std::getline(f, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 2);
}
