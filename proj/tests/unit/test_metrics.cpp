#include "doctest.h"

#include <random>

#include "avground/errors.hpp"
#include "avground/grammar.hpp"
#include "avground/metrics.hpp"

using namespace avground;

namespace {

SampleScore make_score(std::string qa_id, TaskKind kind, bool hit,
                       std::optional<double> t, std::optional<double> v) {
    SampleScore s;
    s.qa_id = std::move(qa_id);
    s.task_kind = kind;
    s.object_hit = hit;
    s.t_iou = t;
    s.v_iou = v;
    return s;
}

GroundTruthRecord simple_gt(std::string qa_id, TaskKind kind) {
    GroundTruthRecord gt;
    gt.qa_id = std::move(qa_id);
    gt.task_kind = kind;
    gt.objects = {{"dog", AvLabel::VisibleAudible}};
    gt.interval = TimeInterval(0.0, 10.0);
    gt.tracks["dog"] = {{1.0, {0, 0, 10, 10}}, {2.0, {0, 0, 10, 10}}};
    return gt;
}

std::string perfect_answer(const GroundTruthRecord& gt) {
    StructuredAnswer answer;
    answer.task_kind = gt.task_kind;
    if (gt.task_kind != TaskKind::Spatial) answer.interval = gt.interval;
    ObjectTrack track;
    track.name = "dog";
    if (gt.task_kind != TaskKind::Temporal) track.boxes = gt.tracks.at("dog");
    answer.tracks.push_back(track);
    return serialize_answer(answer);
}

RewardConfig jaccard_config() {
    RewardConfig config;
    config.fallback = OovFallback::TrigramJaccard;
    return config;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("recall_at") {
    std::vector<SampleScore> all_perfect = {
        make_score("a", TaskKind::Temporal, true, 1.0, std::nullopt),
        make_score("b", TaskKind::Temporal, true, 1.0, std::nullopt),
    };
    CHECK(recall_at(all_perfect, 0.7) == 100.0);

    std::vector<SampleScore> mixed = {
        make_score("a", TaskKind::Temporal, true, 0.2, std::nullopt),
        make_score("b", TaskKind::Temporal, true, 0.4, std::nullopt),
        make_score("c", TaskKind::Temporal, true, 0.6, std::nullopt),
    };
    CHECK(recall_at(mixed, 0.5) == doctest::Approx(100.0 / 3.0));

    SUBCASE("threshold is inclusive") {
        std::vector<SampleScore> boundary = {
            make_score("a", TaskKind::Temporal, true, 0.3, std::nullopt)};
        CHECK(recall_at(boundary, 0.3) == 100.0);
    }
    SUBCASE("empty denominator") {
        std::vector<SampleScore> spatial_only = {
            make_score("a", TaskKind::Spatial, true, std::nullopt, 0.9)};
        CHECK_THROWS_AS((void)recall_at(spatial_only, 0.5), EmptyDenominator);
    }
    SUBCASE("theta domain") {
        CHECK_THROWS_AS((void)recall_at(mixed, 0.0), std::invalid_argument);
        CHECK_THROWS_AS((void)recall_at(mixed, 1.0), std::invalid_argument);
    }
}

TEST_CASE("ap_at") {
    std::vector<SampleScore> zeros = {
        make_score("a", TaskKind::Spatial, false, std::nullopt, 0.0),
        make_score("b", TaskKind::Spatial, false, std::nullopt, 0.0),
    };
    CHECK(ap_at(zeros, 0.3) == 0.0);

    std::vector<SampleScore> pair = {
        make_score("a", TaskKind::Spatial, true, std::nullopt, 0.31),
        make_score("b", TaskKind::Spatial, true, std::nullopt, 0.2),
    };
    CHECK(ap_at(pair, 0.3) == 50.0);

    std::vector<SampleScore> single = {
        make_score("a", TaskKind::Spatial, true, std::nullopt, 0.5)};
    CHECK(ap_at(single, 0.5) == 100.0);
}

TEST_CASE("rates match a filter-and-count oracle and are monotone") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> n_d(1, 40);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SampleScore> scores;
        int n = n_d(rng);
        for (int i = 0; i < n; ++i) {
            scores.push_back(make_score("q" + std::to_string(i), TaskKind::SpatioTemporal,
                                        unit(rng) < 0.5, unit(rng), unit(rng)));
        }
        for (double theta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            long hits = 0;
            for (const SampleScore& s : scores) {
                if (*s.t_iou >= theta) ++hits;
            }
            CHECK(recall_at(scores, theta) == doctest::Approx(100.0 * hits / n).epsilon(1e-12));
        }
        double previous = 1e9;
        for (double theta : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
            double r = recall_at(scores, theta);
            double a = ap_at(scores, theta);
            CHECK(r <= previous);
            previous = r;
            CHECK(a >= 0.0);
            CHECK(a <= 100.0);
        }
    }
}

TEST_CASE("score_dataset") {
    RewardConfig config = jaccard_config();
    std::vector<GroundTruthRecord> gts = {
        simple_gt("q1", TaskKind::Temporal),
        simple_gt("q2", TaskKind::Spatial),
        simple_gt("q3", TaskKind::SpatioTemporal),
    };

    SUBCASE("perfect predictions score ones with the right fields") {
        std::vector<Prediction> preds;
        for (const auto& gt : gts) preds.push_back({gt.qa_id, perfect_answer(gt)});
        std::vector<SampleScore> scores = score_dataset(gts, preds, config);
        REQUIRE(scores.size() == 3);
        for (const SampleScore& s : scores) CHECK(s.object_hit);
        CHECK(scores[0].t_iou == 1.0);
        CHECK(!scores[0].v_iou.has_value());
        CHECK(!scores[1].t_iou.has_value());
        CHECK(scores[1].v_iou == 1.0);
        CHECK(scores[2].t_iou == 1.0);
        CHECK(scores[2].v_iou == 1.0);
    }
    SUBCASE("missing predictions score zero, count preserved") {
        std::vector<SampleScore> scores = score_dataset(gts, {}, config);
        REQUIRE(scores.size() == 3);
        for (const SampleScore& s : scores) {
            CHECK(!s.object_hit);
            if (s.t_iou) CHECK(*s.t_iou == 0.0);
            if (s.v_iou) CHECK(*s.v_iou == 0.0);
        }
    }
    SUBCASE("format failures score zero rather than being dropped") {
        std::vector<Prediction> preds = {{"q1", "garbage"}};
        std::vector<SampleScore> scores = score_dataset(gts, preds, config);
        REQUIRE(scores.size() == 3);
        CHECK(*scores[0].t_iou == 0.0);
    }
    SUBCASE("duplicate and unknown ids are rejected") {
        std::vector<GroundTruthRecord> dup = {simple_gt("q1", TaskKind::Temporal),
                                              simple_gt("q1", TaskKind::Temporal)};
        CHECK_THROWS_AS((void)score_dataset(dup, {}, config), DuplicateQaId);
        std::vector<Prediction> unknown = {{"zz", "text"}};
        CHECK_THROWS_AS((void)score_dataset(gts, unknown, config), UnknownQaId);
        std::vector<Prediction> dup_pred = {{"q1", "a"}, {"q1", "b"}};
        CHECK_THROWS_AS((void)score_dataset(gts, dup_pred, config), DuplicateQaId);
    }
    SUBCASE("jobs does not change the result") {
        std::vector<Prediction> preds;
        for (const auto& gt : gts) preds.push_back({gt.qa_id, perfect_answer(gt)});
        std::vector<SampleScore> one = score_dataset(gts, preds, config, 1);
        std::vector<SampleScore> four = score_dataset(gts, preds, config, 4);
        REQUIRE(one.size() == four.size());
        for (size_t i = 0; i < one.size(); ++i) {
            CHECK(one[i].qa_id == four[i].qa_id);
            CHECK(one[i].object_hit == four[i].object_hit);
            CHECK(one[i].t_iou == four[i].t_iou);
            CHECK(one[i].v_iou == four[i].v_iou);
        }
    }
}

TEST_CASE("aggregate") {
    SUBCASE("single perfect sample per task") {
        std::vector<SampleScore> scores = {
            make_score("a", TaskKind::Temporal, true, 1.0, std::nullopt),
            make_score("b", TaskKind::Spatial, true, std::nullopt, 1.0),
            make_score("c", TaskKind::SpatioTemporal, true, 1.0, 1.0),
        };
        MetricsReport report = aggregate(scores);
        CHECK(report.temporal.object_accuracy == 100.0);
        CHECK(report.temporal.m_tiou == 100.0);
        CHECK(report.temporal.r1_at_07 == 100.0);
        CHECK(!report.temporal.m_viou.has_value());
        CHECK(report.spatial.m_viou == 100.0);
        CHECK(report.spatial.ap_at_05 == 100.0);
        CHECK(!report.spatial.m_tiou.has_value());
        CHECK(report.spatio_temporal.m_tiou == 100.0);
        CHECK(report.spatio_temporal.m_viou == 100.0);
    }
    SUBCASE("hand-aggregated three-sample set") {
        std::vector<SampleScore> scores = {
            make_score("a", TaskKind::Temporal, true, 0.6, std::nullopt),
            make_score("b", TaskKind::Temporal, false, 0.4, std::nullopt),
            make_score("c", TaskKind::Temporal, true, 0.1, std::nullopt),
        };
        MetricsReport report = aggregate(scores);
        CHECK(report.temporal.count == 3);
        CHECK(*report.temporal.object_accuracy ==
              doctest::Approx(100.0 * 2.0 / 3.0).epsilon(1e-12));
        CHECK(*report.temporal.m_tiou ==
              doctest::Approx(100.0 * (0.6 + 0.4 + 0.1) / 3.0).epsilon(1e-12));
        CHECK(*report.temporal.r1_at_03 == doctest::Approx(100.0 * 2.0 / 3.0));
        CHECK(*report.temporal.r1_at_05 == doctest::Approx(100.0 / 3.0));
        CHECK(*report.temporal.r1_at_07 == 0.0);
    }
    SUBCASE("empty buckets render dashes") {
        MetricsReport report = aggregate({});
        std::string table = render_table(report);
        CHECK(table.find("-") != std::string::npos);
        CHECK(report.temporal.count == 0);
        CHECK(!report.temporal.object_accuracy.has_value());
    }
}

TEST_CASE("presentation rounding is half-up to two decimals") {
    CHECK(round2(33.333333) == doctest::Approx(33.33));
    CHECK(round2(33.335) == doctest::Approx(33.34));
    CHECK(round2(0.005) == doctest::Approx(0.01));
    CHECK(round2(100.0) == 100.0);
}

TEST_CASE("reports are deterministic") {
    RewardConfig config = jaccard_config();
    std::vector<GroundTruthRecord> gts = {simple_gt("q1", TaskKind::Temporal),
                                          simple_gt("q2", TaskKind::SpatioTemporal)};
    std::vector<Prediction> preds = {{"q1", perfect_answer(gts[0])}};
    auto render = [&] {
        MetricsReport report = aggregate(score_dataset(gts, preds, config));
        return render_table(report) + report_to_json(report);
    };
    CHECK(render() == render());
}

TEST_SUITE_END();
