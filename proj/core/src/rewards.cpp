#include "avground/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "avground/assignment.hpp"
#include "avground/errors.hpp"
#include "avground/grammar.hpp"

namespace avground {

RewardWeights RewardWeights::preset(TaskKind kind) {
    switch (kind) {
        case TaskKind::Temporal: return {1.0, 1.0, 1.0, 0.0};
        case TaskKind::Spatial: return {1.0, 0.0, 1.0, 1.0};
        case TaskKind::SpatioTemporal: return {1.0, 1.0, 1.0, 1.0};
    }
    return {};
}

const RewardWeights& RewardConfig::weights_for(TaskKind kind) const {
    switch (kind) {
        case TaskKind::Temporal: return weights_temporal;
        case TaskKind::Spatial: return weights_spatial;
        case TaskKind::SpatioTemporal: return weights_spatio_temporal;
    }
    return weights_spatio_temporal;
}

double name_similarity(const std::string& pred, const std::string& gt,
                       const RewardConfig& config) {
    std::optional<std::vector<double>> vp;
    std::optional<std::vector<double>> vg;
    if (config.table != nullptr) {
        vp = config.table->name_embedding(pred, config.stop_words);
        vg = config.table->name_embedding(gt, config.stop_words);
    }
    if (vp && vg) return cosine_similarity(*vp, *vg);
    if (config.fallback == OovFallback::Error) {
        throw OutOfVocabulary(vp ? gt : pred);
    }
    return trigram_jaccard(pred, gt);
}

namespace {

// Matched pred index per gold name (or -1), keeping only pairs at
// similarity >= tau.
std::vector<int> match_gold_to_pred(const std::vector<std::string>& pred_names,
                                    const std::vector<std::string>& gt_names,
                                    const RewardConfig& config) {
    std::vector<int> gold_to_pred(gt_names.size(), -1);
    if (pred_names.empty() || gt_names.empty()) return gold_to_pred;

    std::vector<std::vector<double>> sim(pred_names.size(),
                                         std::vector<double>(gt_names.size()));
    for (size_t i = 0; i < pred_names.size(); ++i) {
        for (size_t j = 0; j < gt_names.size(); ++j) {
            sim[i][j] = name_similarity(pred_names[i], gt_names[j], config);
        }
    }
    std::vector<int> pred_to_gold = max_weight_assignment(sim);
    for (size_t i = 0; i < pred_to_gold.size(); ++i) {
        int j = pred_to_gold[i];
        if (j >= 0 && sim[i][static_cast<size_t>(j)] >= config.tau) {
            gold_to_pred[static_cast<size_t>(j)] = static_cast<int>(i);
        }
    }
    return gold_to_pred;
}

}  // namespace

double object_reward(const std::vector<std::string>& pred_names,
                     const std::vector<std::string>& gt_names, const RewardConfig& config) {
    if (gt_names.empty()) return 0.0;
    std::vector<int> matched = match_gold_to_pred(pred_names, gt_names, config);
    int hits = static_cast<int>(std::count_if(matched.begin(), matched.end(),
                                              [](int i) { return i >= 0; }));
    return static_cast<double>(hits) / static_cast<double>(gt_names.size());
}

double temporal_reward(const TimeInterval& pred, const TimeInterval& gt) {
    double inter = std::max(0.0, std::min(pred.end, gt.end) - std::max(pred.start, gt.start));
    double uni = pred.length() + gt.length() - inter;
    if (uni <= 0.0) {
        return pred.start == gt.start && pred.end == gt.end ? 1.0 : 0.0;
    }
    return inter / uni;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    double inter = std::max(0.0, iw) * std::max(0.0, ih);
    double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double spatial_reward(const ObjectTrack& pred_track, const std::vector<TimedBox>& gt_track,
                      const TimeInterval& overlap, double tolerance) {
    int points = 0;
    double sum = 0.0;
    for (const TimedBox& gold : gt_track) {
        if (!overlap.contains(gold.timestamp)) continue;
        ++points;
        const TimedBox* best = nullptr;
        double best_distance = std::numeric_limits<double>::infinity();
        for (const TimedBox& pred : pred_track.boxes) {
            double d = std::abs(pred.timestamp - gold.timestamp);
            if (d < best_distance) {  // ties keep the earlier box
                best_distance = d;
                best = &pred;
            }
        }
        if (best != nullptr && best_distance <= tolerance + 1e-9) {
            sum += box_iou(best->box, gold.box);
        }
    }
    return points == 0 ? 0.0 : sum / points;
}

double total_reward(double format, double temporal, double object, double spatial,
                    const RewardWeights& weights) {
    return weights.format * format + weights.temporal * temporal +
           weights.object * object + weights.spatial * spatial;
}

RewardBreakdown score_sample(std::string_view text, const GroundTruthRecord& gt,
                             const RewardConfig& config) {
    RewardBreakdown breakdown;
    if (!check_format(text, gt.task_kind)) {
        return breakdown;  // unparseable output earns only format feedback
    }
    StructuredAnswer answer = std::move(parse_answer(text, gt.task_kind)).value();
    breakdown.format = 1.0;

    std::vector<std::string> pred_names;
    pred_names.reserve(answer.tracks.size());
    for (const ObjectTrack& track : answer.tracks) pred_names.push_back(track.name);
    std::vector<std::string> gt_names;
    gt_names.reserve(gt.objects.size());
    for (const GtObject& object : gt.objects) gt_names.push_back(object.name);

    std::vector<int> gold_to_pred = match_gold_to_pred(pred_names, gt_names, config);
    if (!gt_names.empty()) {
        int hits = static_cast<int>(std::count_if(gold_to_pred.begin(), gold_to_pred.end(),
                                                  [](int i) { return i >= 0; }));
        breakdown.object = static_cast<double>(hits) / static_cast<double>(gt_names.size());
    }

    if (gt.task_kind != TaskKind::Spatial && answer.interval) {
        breakdown.temporal = temporal_reward(*answer.interval, gt.interval);
    }

    if (gt.task_kind != TaskKind::Temporal && !gt.objects.empty()) {
        // Spatial questions state the interval; otherwise score over the
        // overlap of the predicted and gold intervals.
        std::optional<TimeInterval> overlap;
        if (gt.task_kind == TaskKind::Spatial) {
            overlap = gt.interval;
        } else if (answer.interval) {
            double start = std::max(answer.interval->start, gt.interval.start);
            double end = std::min(answer.interval->end, gt.interval.end);
            if (start <= end) overlap = TimeInterval(start, end);
        }
        if (overlap) {
            double sum = 0.0;
            for (size_t j = 0; j < gt.objects.size(); ++j) {
                int i = gold_to_pred[j];
                if (i < 0) continue;  // spatial credit requires a correct object
                auto it = gt.tracks.find(gt.objects[j].name);
                if (it == gt.tracks.end()) continue;
                sum += spatial_reward(answer.tracks[static_cast<size_t>(i)], it->second,
                                      *overlap, config.timestamp_tolerance);
            }
            breakdown.spatial = sum / static_cast<double>(gt.objects.size());
        }
    }

    breakdown.total = total_reward(breakdown.format, breakdown.temporal, breakdown.object,
                                   breakdown.spatial, config.weights_for(gt.task_kind));
    return breakdown;
}

}  // namespace avground
