#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "avground/assignment.hpp"
#include "avground/errors.hpp"
#include "avground/grammar.hpp"
#include "avground/rewards.hpp"

using namespace avground;

namespace {

// Brute-force best assignment total, the oracle the fast paths must match.
double best_assignment_total(const std::vector<std::vector<double>>& w) {
    size_t rows = w.size();
    size_t cols = rows == 0 ? 0 : w[0].size();
    if (rows == 0 || cols == 0) return 0.0;
    if (rows <= cols) {
        std::vector<int> cols_idx(cols);
        std::iota(cols_idx.begin(), cols_idx.end(), 0);
        double best = -1e300;
        std::sort(cols_idx.begin(), cols_idx.end());
        do {
            double total = 0.0;
            for (size_t i = 0; i < rows; ++i) total += w[i][static_cast<size_t>(cols_idx[i])];
            best = std::max(best, total);
        } while (std::next_permutation(cols_idx.begin(), cols_idx.end()));
        return best;
    }
    std::vector<std::vector<double>> t(cols, std::vector<double>(rows));
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) t[j][i] = w[i][j];
    }
    return best_assignment_total(t);
}

double total_of(const std::vector<std::vector<double>>& w, const std::vector<int>& row_to_col) {
    double total = 0.0;
    for (size_t i = 0; i < row_to_col.size(); ++i) {
        if (row_to_col[i] >= 0) total += w[i][static_cast<size_t>(row_to_col[i])];
    }
    return total;
}

// 4 tokens with hand-set geometry: sim(puppy,dog)=0.9, sim(car,vehicle)=0.8,
// every cross pair 0.
EmbeddingTable toy_table() {
    EmbeddingTable table;
    table.insert("dog", {1.0, 0.0, 0.0, 0.0});
    table.insert("puppy", {0.9, std::sqrt(1.0 - 0.81), 0.0, 0.0});
    table.insert("vehicle", {0.0, 0.0, 1.0, 0.0});
    table.insert("car", {0.0, 0.0, 0.8, 0.6});
    return table;
}

GroundTruthRecord worked_example_gold() {
    GroundTruthRecord gt;
    gt.qa_id = "q1";
    gt.task_kind = TaskKind::SpatioTemporal;
    gt.objects = {{"dog", AvLabel::VisibleAudible}, {"cat", AvLabel::VisibleAudible}};
    gt.interval = TimeInterval(10.0, 20.5);
    gt.tracks["dog"] = {{10.0, {100, 200, 300, 400}},
                        {11.0, {109, 280, 320, 432}},
                        {12.0, {100, 200, 300, 400}}};
    gt.tracks["cat"] = {{12.5, {50, 60, 150, 160}}, {13.5, {55, 62, 140, 150}}};
    return gt;
}

const std::string kWorkedExample =
    "<answer>\n<when>[10.0,20.5]</when>\n<object> dog </object>\n<where>\n"
    "10.0: [100,200,300,400]\n11.0: [109,280,320,432]\n12.0: [100,200,300,400]\n</where>\n"
    "<object> cat </object>\n<where>\n12.5: [50,60,150,160]\n13.5: [55,62,140,150]\n"
    "</where>\n</answer>\n";

RewardConfig jaccard_config() {
    RewardConfig config;
    config.fallback = OovFallback::TrigramJaccard;
    return config;
}

}  // namespace

TEST_SUITE_BEGIN("rewards");

TEST_CASE("cosine similarity") {
    std::vector<double> a{1, 2, 3};
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> e1{1, 0};
    std::vector<double> e2{0, 1};
    CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0));
    std::vector<double> b{4, 5, 6};
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.9746318461970762).epsilon(1e-12));

    CHECK_THROWS_AS((void)cosine_similarity(a, e1), DimensionMismatch);
    std::vector<double> zero{0, 0, 0};
    CHECK_THROWS_AS((void)cosine_similarity(a, zero), ZeroVector);
}

TEST_CASE("trigram jaccard") {
    CHECK(trigram_jaccard("dog", "dog") == 1.0);
    CHECK(trigram_jaccard("dog", "cat") == 0.0);
    CHECK(trigram_jaccard("sailboat", "sailboats") > 0.5);
}

TEST_CASE("object reward") {
    RewardConfig config = jaccard_config();
    SUBCASE("identical names earn full reward") {
        CHECK(object_reward({"dog"}, {"dog"}, config) == 1.0);
    }
    SUBCASE("nothing predicted earns zero") {
        CHECK(object_reward({}, {"dog"}, config) == 0.0);
    }
    SUBCASE("optimal assignment over the toy table") {
        EmbeddingTable table = toy_table();
        RewardConfig with_table;
        with_table.table = &table;
        with_table.tau = 0.5;
        CHECK(object_reward({"puppy", "car"}, {"dog", "vehicle"}, with_table) == 1.0);
        // the crossed pairing would earn nothing, the assignment must avoid it
        CHECK(object_reward({"car", "puppy"}, {"dog", "vehicle"}, with_table) == 1.0);
        // one good, one bad
        CHECK(object_reward({"puppy"}, {"dog", "vehicle"}, with_table) == 0.5);
    }
    SUBCASE("out-of-vocabulary handling follows the policy") {
        EmbeddingTable table = toy_table();
        RewardConfig strict;
        strict.table = &table;
        strict.fallback = OovFallback::Error;
        CHECK_THROWS_AS((void)object_reward({"zebra"}, {"dog"}, strict), OutOfVocabulary);
        RewardConfig lenient;
        lenient.table = &table;
        lenient.fallback = OovFallback::TrigramJaccard;
        CHECK(object_reward({"zebra"}, {"zebra"}, lenient) == 1.0);
    }
    SUBCASE("multi-word names average their content tokens") {
        EmbeddingTable table;
        table.insert("people", {1.0, 0.0});
        table.insert("crowd", {1.0, 0.0});
        RewardConfig with_table;
        with_table.table = &table;
        CHECK(name_similarity("a group of people", "crowd", with_table) ==
              doctest::Approx(1.0));
    }
}

TEST_CASE("temporal reward") {
    CHECK(temporal_reward(TimeInterval(5, 15), TimeInterval(5, 15)) == 1.0);
    CHECK(temporal_reward(TimeInterval(0, 10), TimeInterval(20, 30)) == 0.0);
    CHECK(temporal_reward(TimeInterval(0, 10), TimeInterval(5, 15)) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    SUBCASE("zero-length intervals") {
        CHECK(temporal_reward(TimeInterval(5, 5), TimeInterval(5, 5)) == 1.0);
        CHECK(temporal_reward(TimeInterval(5, 5), TimeInterval(6, 6)) == 0.0);
    }
    SUBCASE("symmetry") {
        std::mt19937 rng(3);
        std::uniform_int_distribution<int> d(0, 300);
        for (int i = 0; i < 200; ++i) {
            int a = d(rng), b = d(rng), c = d(rng), e = d(rng);
            TimeInterval x(std::min(a, b) / 10.0, std::max(a, b) / 10.0);
            TimeInterval y(std::min(c, e) / 10.0, std::max(c, e) / 10.0);
            CHECK(temporal_reward(x, y) == temporal_reward(y, x));
            double v = temporal_reward(x, y);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("box iou") {
    BoundingBox a{0, 0, 10, 10};
    CHECK(box_iou(a, a) == 1.0);
    CHECK(box_iou(a, {5, 5, 15, 15}) == doctest::Approx(25.0 / 175.0).epsilon(1e-12));
    CHECK(box_iou(a, {10, 0, 20, 10}) == 0.0);  // touching edges

    SUBCASE("scale covariance") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> coord(0.0, 100.0);
        std::uniform_real_distribution<double> scale_d(0.1, 40.0);
        for (int i = 0; i < 200; ++i) {
            double x1 = coord(rng), y1 = coord(rng), x2 = x1 + coord(rng), y2 = y1 + coord(rng);
            double u1 = coord(rng), v1 = coord(rng), u2 = u1 + coord(rng), v2 = v1 + coord(rng);
            BoundingBox p{x1, y1, x2, y2};
            BoundingBox q{u1, v1, u2, v2};
            double s = scale_d(rng);
            BoundingBox ps{s * x1, s * y1, s * x2, s * y2};
            BoundingBox qs{s * u1, s * v1, s * u2, s * v2};
            CHECK(box_iou(p, q) == doctest::Approx(box_iou(ps, qs)).epsilon(1e-9));
            CHECK(box_iou(p, q) == box_iou(q, p));
        }
    }
}

TEST_CASE("spatial reward") {
    std::vector<TimedBox> gold = {{10.0, {0, 0, 10, 10}},
                                  {11.0, {0, 0, 10, 10}},
                                  {12.0, {0, 0, 10, 10}}};
    TimeInterval overlap(10.0, 12.0);
    SUBCASE("identical tracks") {
        ObjectTrack pred{"dog", gold};
        CHECK(spatial_reward(pred, gold, overlap) == 1.0);
    }
    SUBCASE("empty prediction") {
        ObjectTrack pred{"dog", {}};
        CHECK(spatial_reward(pred, gold, overlap) == 0.0);
    }
    SUBCASE("two-point worked value") {
        std::vector<TimedBox> two = {{10.0, {0, 0, 10, 10}}, {11.0, {0, 0, 10, 10}}};
        ObjectTrack pred{"dog", {{10.0, {0, 0, 10, 10}}, {11.0, {5, 5, 15, 15}}}};
        CHECK(spatial_reward(pred, two, TimeInterval(10.0, 11.0)) ==
              doctest::Approx((1.0 + 1.0 / 7.0) / 2.0).epsilon(1e-12));
    }
    SUBCASE("matching radius is half a second") {
        std::vector<TimedBox> one = {{10.0, {0, 0, 10, 10}}};
        ObjectTrack near{"dog", {{10.4, {0, 0, 10, 10}}}};
        CHECK(spatial_reward(near, one, overlap) == 1.0);
        ObjectTrack far{"dog", {{10.6, {0, 0, 10, 10}}}};
        CHECK(spatial_reward(far, one, overlap) == 0.0);
        ObjectTrack at_limit{"dog", {{10.5, {0, 0, 10, 10}}}};
        CHECK(spatial_reward(at_limit, one, overlap) == 1.0);
    }
    SUBCASE("gold timestamps outside the overlap are not counted") {
        ObjectTrack pred{"dog", gold};
        CHECK(spatial_reward(pred, gold, TimeInterval(10.0, 11.0)) == 1.0);
        CHECK(spatial_reward(pred, gold, TimeInterval(50.0, 60.0)) == 0.0);
    }
}

TEST_CASE("total reward") {
    RewardWeights unit{1, 1, 1, 1};
    CHECK(total_reward(1, 0, 0, 0, RewardWeights::preset(TaskKind::Temporal)) == 1.0);
    CHECK(total_reward(0, 0, 0, 0, unit) == 0.0);
    CHECK(total_reward(1, 0.5, 1, 0.25, unit) == doctest::Approx(2.75).epsilon(1e-12));

    SUBCASE("shipped presets keep the format weight at 1") {
        CHECK(RewardWeights::preset(TaskKind::Temporal).format == 1.0);
        CHECK(RewardWeights::preset(TaskKind::Spatial).format == 1.0);
        CHECK(RewardWeights::preset(TaskKind::SpatioTemporal).format == 1.0);
        CHECK(RewardWeights::preset(TaskKind::Temporal).spatial == 0.0);
        CHECK(RewardWeights::preset(TaskKind::Spatial).temporal == 0.0);
    }
    SUBCASE("identity against an independent sum") {
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> unit_d(0.0, 1.0);
        std::uniform_real_distribution<double> weight_d(0.0, 3.0);
        for (int i = 0; i < 200; ++i) {
            double f = unit_d(rng) < 0.5 ? 0.0 : 1.0;
            double t = unit_d(rng), o = unit_d(rng), s = unit_d(rng);
            RewardWeights w{weight_d(rng), weight_d(rng), weight_d(rng), weight_d(rng)};
            double expected = w.format * f + w.temporal * t + w.object * o + w.spatial * s;
            CHECK(std::abs(total_reward(f, t, o, s, w) - expected) <= 1e-12);
        }
    }
}

TEST_CASE("score_sample composes the components") {
    GroundTruthRecord gt = worked_example_gold();
    RewardConfig config = jaccard_config();

    SUBCASE("the worked example scores itself perfectly") {
        RewardBreakdown b = score_sample(kWorkedExample, gt, config);
        CHECK(b.format == 1.0);
        CHECK(b.object == 1.0);
        CHECK(b.temporal == 1.0);
        CHECK(b.spatial == 1.0);
        CHECK(b.total == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("unparseable text scores zero") {
        RewardBreakdown b = score_sample("<answer> nonsense", gt, config);
        CHECK(b.format == 0.0);
        CHECK(b.object == 0.0);
        CHECK(b.temporal == 0.0);
        CHECK(b.spatial == 0.0);
        CHECK(b.total == 0.0);
    }
    SUBCASE("wrong object names gate the spatial reward to zero") {
        // same structure, names nothing like the gold ones
        std::string text = kWorkedExample;
        size_t pos;
        while ((pos = text.find(" dog ")) != std::string::npos) text.replace(pos, 5, " xq ");
        while ((pos = text.find(" cat ")) != std::string::npos) text.replace(pos, 5, " zl ");
        RewardBreakdown b = score_sample(text, gt, config);
        CHECK(b.format == 1.0);
        CHECK(b.object == 0.0);
        CHECK(b.temporal == 1.0);  // the interval is still right
        CHECK(b.spatial == 0.0);   // no correct object, no spatial credit
        CHECK(b.total == doctest::Approx(2.0));
    }
    SUBCASE("format gate zeroes everything") {
        std::string no_close = kWorkedExample.substr(0, kWorkedExample.rfind("</answer>"));
        RewardBreakdown b = score_sample(no_close, gt, config);
        CHECK(b.total == 0.0);
        CHECK(b.format == 0.0);
    }
    SUBCASE("partial object hit scores the matched share") {
        // only the dog track, cat missing entirely
        std::string text =
            "<answer>\n<when>[10.0,20.5]</when>\n<object> dog </object>\n<where>\n"
            "10.0: [100,200,300,400]\n11.0: [109,280,320,432]\n12.0: [100,200,300,400]\n"
            "</where>\n</answer>";
        RewardBreakdown b = score_sample(text, gt, config);
        CHECK(b.object == 0.5);
        CHECK(b.spatial == doctest::Approx(0.5));  // dog perfect, cat contributes 0
        CHECK(b.total == doctest::Approx(1.0 + 1.0 + 0.5 + 0.5));
    }
}

TEST_CASE("assignment routes agree") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    std::uniform_int_distribution<int> size_d(1, 7);
    for (int i = 0; i < 150; ++i) {
        size_t rows = static_cast<size_t>(size_d(rng));
        size_t cols = static_cast<size_t>(size_d(rng));
        std::vector<std::vector<double>> weights(rows, std::vector<double>(cols));
        for (auto& row : weights) {
            for (double& v : row) v = w(rng);
        }
        double oracle = best_assignment_total(weights);
        CHECK(total_of(weights, detail::assignment_exhaustive(weights)) ==
              doctest::Approx(oracle).epsilon(1e-12));
        CHECK(total_of(weights, detail::assignment_hungarian(weights)) ==
              doctest::Approx(oracle).epsilon(1e-9));
        CHECK(total_of(weights, max_weight_assignment(weights)) ==
              doctest::Approx(oracle).epsilon(1e-9));
    }
    SUBCASE("hungarian handles sizes past the exhaustive cutoff") {
        std::vector<std::vector<double>> weights(12, std::vector<double>(9));
        for (auto& row : weights) {
            for (double& v : row) v = w(rng);
        }
        std::vector<int> result = max_weight_assignment(weights);
        // valid one-to-one structure
        std::vector<bool> used(9, false);
        int assigned = 0;
        for (int col : result) {
            if (col < 0) continue;
            CHECK(!used[static_cast<size_t>(col)]);
            used[static_cast<size_t>(col)] = true;
            ++assigned;
        }
        CHECK(assigned == 9);
    }
}

TEST_CASE("embedding table loader") {
    SUBCASE("round trip through the text format") {
        std::istringstream in("2 3\ndog 1 0 0\ncat 0 1 0\n");
        EmbeddingTable table = EmbeddingTable::load(in);
        CHECK(table.size() == 2);
        CHECK(table.dimension() == 3);
        REQUIRE(table.find("dog") != nullptr);
        CHECK((*table.find("dog"))[0] == 1.0);
    }
    SUBCASE("dimension drift is rejected") {
        std::istringstream in("2 3\ndog 1 0 0\ncat 0 1\n");
        CHECK_THROWS_AS((void)EmbeddingTable::load(in), SchemaError);
    }
    SUBCASE("NaN is rejected") {
        std::istringstream in("1 2\ndog nan 1\n");
        CHECK_THROWS_AS((void)EmbeddingTable::load(in), SchemaError);
    }
    SUBCASE("zero vectors are rejected") {
        std::istringstream in("1 2\ndog 0 0\n");
        CHECK_THROWS_AS((void)EmbeddingTable::load(in), SchemaError);
    }
    SUBCASE("count mismatch is rejected") {
        std::istringstream in("3 2\ndog 1 0\n");
        CHECK_THROWS_AS((void)EmbeddingTable::load(in), SchemaError);
    }
    SUBCASE("stop words are dropped from name embeddings") {
        EmbeddingTable table;
        table.insert("people", {0.0, 2.0});
        table.insert("boat", {2.0, 0.0});
        std::vector<std::string> stop{"a", "an", "the", "of", "group"};
        auto v = table.name_embedding("a group of people", stop);
        REQUIRE(v.has_value());
        CHECK((*v)[0] == 0.0);
        CHECK((*v)[1] == 2.0);
        auto mixed = table.name_embedding("people boat", stop);
        REQUIRE(mixed.has_value());
        CHECK((*mixed)[0] == 1.0);  // mean of the two tokens
        CHECK((*mixed)[1] == 1.0);
        CHECK(!table.name_embedding("the of a", stop).has_value());
    }
}

TEST_SUITE_END();
