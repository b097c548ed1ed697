#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avground/answer.hpp"
#include "avground/embedding.hpp"

namespace avground {

/// Weights of the four reward components. The format weight is 1 in every
/// shipped preset; the others are zeroed where a component does not apply.
struct RewardWeights {
    double format = 1.0;
    double temporal = 1.0;
    double object = 1.0;
    double spatial = 1.0;

    static RewardWeights preset(TaskKind kind);

    bool operator==(const RewardWeights&) const = default;
};

/// The four component rewards and their weighted total for one sample.
/// When format is 0 the content components are all 0 as well.
struct RewardBreakdown {
    double format = 0.0;
    double object = 0.0;
    double temporal = 0.0;
    double spatial = 0.0;
    double total = 0.0;
};

/// One annotated object of a question.
struct GtObject {
    std::string name;
    AvLabel label = AvLabel::VisibleAudible;

    bool operator==(const GtObject&) const = default;
};

/// Gold annotation for one QA.
struct GroundTruthRecord {
    std::string qa_id;
    TaskKind task_kind = TaskKind::Temporal;
    std::string question;
    std::vector<GtObject> objects;
    TimeInterval interval;
    std::map<std::string, std::vector<TimedBox>> tracks;  // name -> gold boxes
};

/// What to do when a name has no usable embedding.
enum class OovFallback {
    Error,           // throw OutOfVocabulary (training: fail fast)
    TrigramJaccard,  // substitute character-trigram Jaccard for cosine
};

/// Everything score_sample needs besides the sample itself. The embedding
/// table is borrowed, not owned; it may be null when every lookup is
/// expected to go through the fallback.
struct RewardConfig {
    double tau = 0.5;
    double timestamp_tolerance = 0.5;  // seconds; half the 1 Hz box sampling period
    OovFallback fallback = OovFallback::Error;
    std::vector<std::string> stop_words = {"a", "an", "the", "of", "group"};
    RewardWeights weights_temporal = RewardWeights::preset(TaskKind::Temporal);
    RewardWeights weights_spatial = RewardWeights::preset(TaskKind::Spatial);
    RewardWeights weights_spatio_temporal = RewardWeights::preset(TaskKind::SpatioTemporal);
    const EmbeddingTable* table = nullptr;

    const RewardWeights& weights_for(TaskKind kind) const;
};

/// Similarity of two object names: cosine of their embeddings, or the
/// configured fallback when either name is out of vocabulary.
double name_similarity(const std::string& pred, const std::string& gt,
                       const RewardConfig& config);

/// Fraction of gold names whose partner under the maximum-weight
/// one-to-one assignment reaches similarity >= tau.
double object_reward(const std::vector<std::string>& pred_names,
                     const std::vector<std::string>& gt_names, const RewardConfig& config);

/// Intersection-over-union of two time intervals. A zero-length union is
/// 1 for two identical point intervals and 0 otherwise.
double temporal_reward(const TimeInterval& pred, const TimeInterval& gt);

/// Area IoU of two boxes; 0 when the union has zero area.
double box_iou(const BoundingBox& a, const BoundingBox& b);

/// Mean box IoU over the gold timestamps inside `overlap`. Each gold
/// timestamp is matched to the nearest predicted box within `tolerance`
/// seconds (ties to the earlier box); unmatched timestamps contribute 0.
/// No gold timestamp in the overlap yields 0.
double spatial_reward(const ObjectTrack& pred_track, const std::vector<TimedBox>& gt_track,
                      const TimeInterval& overlap, double tolerance = 0.5);

/// Weighted sum of the four components.
double total_reward(double format, double temporal, double object, double spatial,
                    const RewardWeights& weights);

/// Scores raw model output against one gold record. Total over arbitrary
/// text: output failing check_format earns the all-zero breakdown.
RewardBreakdown score_sample(std::string_view text, const GroundTruthRecord& gt,
                             const RewardConfig& config);

}  // namespace avground
