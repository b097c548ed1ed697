#pragma once

#include <optional>
#include <string>
#include <vector>

#include "avground/rewards.hpp"

namespace avground {

/// One raw model output keyed by its question.
struct Prediction {
    std::string qa_id;
    std::string text;
};

/// Per-sample evaluation quantities. tIoU exists for temporal and
/// spatio-temporal questions, vIoU for spatial and spatio-temporal ones.
struct SampleScore {
    std::string qa_id;
    TaskKind task_kind = TaskKind::Temporal;
    bool object_hit = false;
    std::optional<double> t_iou;
    std::optional<double> v_iou;
};

/// Scores every gold record against its prediction. Gold records without a
/// prediction score zero; predictions without a gold record are an error.
/// Output is sorted by qa_id. `jobs` > 1 fans the per-sample work out to
/// that many threads; the result does not depend on it.
std::vector<SampleScore> score_dataset(const std::vector<GroundTruthRecord>& gts,
                                       const std::vector<Prediction>& predictions,
                                       const RewardConfig& config, int jobs = 1);

/// 100 * |{tIoU >= theta}| / |{tIoU present}|, threshold inclusive.
/// Throws EmptyDenominator when no sample carries a tIoU.
double recall_at(const std::vector<SampleScore>& scores, double theta);

/// Same reading on the vIoU axis: with a single prediction per question
/// precision@1 degenerates to the fraction of samples reaching theta.
double ap_at(const std::vector<SampleScore>& scores, double theta);

/// Aggregated cells for one task; percentages, unset when not applicable.
struct TaskMetrics {
    long count = 0;
    std::optional<double> object_accuracy;
    std::optional<double> m_tiou;
    std::optional<double> r1_at_03;
    std::optional<double> r1_at_05;
    std::optional<double> r1_at_07;
    std::optional<double> m_viou;
    std::optional<double> ap_at_03;
    std::optional<double> ap_at_05;
};

struct MetricsReport {
    TaskMetrics temporal;
    TaskMetrics spatial;
    TaskMetrics spatio_temporal;
};

MetricsReport aggregate(const std::vector<SampleScore>& scores);

/// Rounds half-up to two decimals; applied at presentation only.
double round2(double value);

/// Fixed-width text table, one row per task, absent cells rendered "-".
std::string render_table(const MetricsReport& report);

/// Machine-readable JSON with the exact MetricsReport field names.
std::string report_to_json(const MetricsReport& report);

}  // namespace avground
