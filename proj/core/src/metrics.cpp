#include "avground/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "avground/errors.hpp"

namespace avground {

namespace {

SampleScore score_one(const GroundTruthRecord& gt, const std::string* text,
                      const RewardConfig& config) {
    SampleScore score;
    score.qa_id = gt.qa_id;
    score.task_kind = gt.task_kind;
    if (gt.task_kind != TaskKind::Spatial) score.t_iou = 0.0;
    if (gt.task_kind != TaskKind::Temporal) score.v_iou = 0.0;
    if (text == nullptr) return score;

    RewardBreakdown breakdown = score_sample(*text, gt, config);
    score.object_hit = breakdown.object == 1.0;  // every gold object matched
    if (score.t_iou) score.t_iou = breakdown.temporal;
    if (score.v_iou) score.v_iou = breakdown.spatial;
    return score;
}

}  // namespace

std::vector<SampleScore> score_dataset(const std::vector<GroundTruthRecord>& gts,
                                       const std::vector<Prediction>& predictions,
                                       const RewardConfig& config, int jobs) {
    std::unordered_map<std::string, const std::string*> text_by_id;
    text_by_id.reserve(predictions.size());
    for (const Prediction& pred : predictions) {
        if (!text_by_id.emplace(pred.qa_id, &pred.text).second) {
            throw DuplicateQaId(pred.qa_id);
        }
    }

    std::vector<const GroundTruthRecord*> ordered;
    ordered.reserve(gts.size());
    std::unordered_set<std::string> seen;
    seen.reserve(gts.size());
    for (const GroundTruthRecord& gt : gts) {
        if (!seen.insert(gt.qa_id).second) throw DuplicateQaId(gt.qa_id);
        ordered.push_back(&gt);
    }
    for (const Prediction& pred : predictions) {
        if (!seen.contains(pred.qa_id)) throw UnknownQaId(pred.qa_id);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const GroundTruthRecord* a, const GroundTruthRecord* b) {
                  return a->qa_id < b->qa_id;
              });

    std::vector<SampleScore> scores(ordered.size());
    auto worker = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            auto it = text_by_id.find(ordered[i]->qa_id);
            const std::string* text = it == text_by_id.end() ? nullptr : it->second;
            scores[i] = score_one(*ordered[i], text, config);
        }
    };

    size_t n = ordered.size();
    size_t threads = std::max(1, jobs);
    if (threads <= 1 || n < 2) {
        worker(0, n);
    } else {
        threads = std::min(threads, n);
        std::vector<std::thread> pool;
        size_t chunk = (n + threads - 1) / threads;
        for (size_t t = 0; t < threads; ++t) {
            size_t begin = t * chunk;
            size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (std::thread& th : pool) th.join();
    }
    return scores;
}

namespace {

double rate_at(const std::vector<SampleScore>& scores, double theta,
               std::optional<double> SampleScore::* field) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("threshold must lie in (0,1)");
    }
    long present = 0;
    long hits = 0;
    for (const SampleScore& s : scores) {
        const std::optional<double>& value = s.*field;
        if (!value) continue;
        ++present;
        if (*value >= theta) ++hits;
    }
    if (present == 0) throw EmptyDenominator("no sample carries this IoU field");
    return 100.0 * static_cast<double>(hits) / static_cast<double>(present);
}

TaskMetrics aggregate_task(const std::vector<SampleScore>& scores, TaskKind kind) {
    TaskMetrics m;
    long hits = 0;
    double t_sum = 0.0;
    long t_n = 0;
    double v_sum = 0.0;
    long v_n = 0;
    std::vector<SampleScore> bucket;
    for (const SampleScore& s : scores) {
        if (s.task_kind != kind) continue;
        bucket.push_back(s);
        ++m.count;
        if (s.object_hit) ++hits;
        if (s.t_iou) {
            t_sum += *s.t_iou;
            ++t_n;
        }
        if (s.v_iou) {
            v_sum += *s.v_iou;
            ++v_n;
        }
    }
    if (m.count == 0) return m;
    m.object_accuracy = 100.0 * static_cast<double>(hits) / static_cast<double>(m.count);
    if (t_n > 0) {
        m.m_tiou = 100.0 * t_sum / static_cast<double>(t_n);
        m.r1_at_03 = recall_at(bucket, 0.3);
        m.r1_at_05 = recall_at(bucket, 0.5);
        m.r1_at_07 = recall_at(bucket, 0.7);
    }
    if (v_n > 0) {
        m.m_viou = 100.0 * v_sum / static_cast<double>(v_n);
        m.ap_at_03 = ap_at(bucket, 0.3);
        m.ap_at_05 = ap_at(bucket, 0.5);
    }
    return m;
}

std::string cell(const std::optional<double>& value) {
    if (!value) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", round2(*value));
    return buf;
}

nlohmann::ordered_json task_json(const TaskMetrics& m) {
    nlohmann::ordered_json j;
    j["count"] = m.count;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) {
            j[key] = round2(*v);
        } else {
            j[key] = nullptr;
        }
    };
    put("object_accuracy", m.object_accuracy);
    put("m_tIoU", m.m_tiou);
    put("R1@0.3", m.r1_at_03);
    put("R1@0.5", m.r1_at_05);
    put("R1@0.7", m.r1_at_07);
    put("m_vIoU", m.m_viou);
    put("AP@0.3", m.ap_at_03);
    put("AP@0.5", m.ap_at_05);
    return j;
}

}  // namespace

double recall_at(const std::vector<SampleScore>& scores, double theta) {
    return rate_at(scores, theta, &SampleScore::t_iou);
}

double ap_at(const std::vector<SampleScore>& scores, double theta) {
    return rate_at(scores, theta, &SampleScore::v_iou);
}

MetricsReport aggregate(const std::vector<SampleScore>& scores) {
    MetricsReport report;
    report.temporal = aggregate_task(scores, TaskKind::Temporal);
    report.spatial = aggregate_task(scores, TaskKind::Spatial);
    report.spatio_temporal = aggregate_task(scores, TaskKind::SpatioTemporal);
    return report;
}

double round2(double value) {
    return std::floor(value * 100.0 + 0.5) / 100.0;
}

std::string render_table(const MetricsReport& report) {
    static constexpr const char* kColumns[] = {"count",  "obj_acc", "m_tIoU", "R1@0.3",
                                               "R1@0.5", "R1@0.7",  "m_vIoU", "AP@0.3",
                                               "AP@0.5"};
    char line[256];
    std::string out;
    out += "task             ";
    for (const char* c : kColumns) {
        std::snprintf(line, sizeof line, " %8s", c);
        out += line;
    }
    out += "\n";
    auto row = [&](const char* name, const TaskMetrics& m) {
        std::snprintf(line, sizeof line, "%-17s %8ld", name, m.count);
        out += line;
        for (const std::optional<double>* v :
             {&m.object_accuracy, &m.m_tiou, &m.r1_at_03, &m.r1_at_05, &m.r1_at_07,
              &m.m_viou, &m.ap_at_03, &m.ap_at_05}) {
            std::snprintf(line, sizeof line, " %8s", cell(*v).c_str());
            out += line;
        }
        out += "\n";
    };
    row("temporal", report.temporal);
    row("spatial", report.spatial);
    row("spatio-temporal", report.spatio_temporal);
    return out;
}

std::string report_to_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["temporal"] = task_json(report.temporal);
    j["spatial"] = task_json(report.spatial);
    j["spatio-temporal"] = task_json(report.spatio_temporal);
    return j.dump(2) + "\n";
}

}  // namespace avground
