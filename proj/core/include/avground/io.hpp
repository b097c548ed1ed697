#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "avground/metrics.hpp"
#include "avground/pipeline.hpp"
#include "avground/rewards.hpp"

namespace avground {

// File surfaces. All readers throw SchemaError (with path and line) on
// malformed input; writers emit deterministic, qa_id/video_id ordered
// output so identical inputs give byte-identical files.

/// JSON Lines of {qa_id, task, question, objects, interval, tracks}.
std::vector<GroundTruthRecord> load_ground_truth_jsonl(const std::string& path);

/// JSON Lines of {qa_id, text}.
std::vector<Prediction> load_predictions_jsonl(const std::string& path);

/// JSON array of VideoRecord objects.
std::vector<VideoRecord> load_manifest_json(const std::string& path);

void write_manifest_json(std::ostream& out, const std::vector<KeptVideo>& kept);
void write_rejects_json(std::ostream& out, const std::vector<RejectedVideo>& rejected);

/// JSON array of {video_id, frames: {"t": {object: [x1,y1,x2,y2]}}}.
BoxSidecar load_box_sidecar_json(const std::string& path);

/// QA records as ground-truth JSON Lines plus a split field.
std::vector<QaRecord> load_qa_jsonl(const std::string& path);
void write_qa_jsonl(std::ostream& out, const std::vector<QaRecord>& qas);

/// CSV with a "video_id,rater_a,rater_b" header.
std::vector<RatingPair> load_ratings_csv(const std::string& path);

/// {"train": {"temporal": n, "spatial": n, "spatio-temporal": n}, "test": {...}}
DeclaredCounts load_declared_counts_json(const std::string& path);

std::string split_report_to_json(const SplitReport& report);
std::string qc_report_to_json(const QcReport& report);

/// One {qa_id, format, object, temporal, spatial, total} line.
std::string breakdown_jsonl_line(const std::string& qa_id, const RewardBreakdown& b);

}  // namespace avground
