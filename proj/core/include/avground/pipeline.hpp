#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "avground/rewards.hpp"

namespace avground {

/// One audio-visual event of a video manifest entry.
struct EventRecord {
    std::string category;
    std::string caption;
    TimeInterval interval;
    std::vector<GtObject> objects;

    bool operator==(const EventRecord&) const = default;
};

/// Manifest entry the filtering pipeline operates on.
struct VideoRecord {
    std::string video_id;
    double duration = 0.0;
    std::string split = "unassigned";  // train | test | unassigned
    std::vector<EventRecord> events;

    bool operator==(const VideoRecord&) const = default;
};

enum class DurationBucket { Short, Medium, Long, Rejected };

const char* to_string(DurationBucket bucket);

struct FilterConfig {
    double min_duration = 2.0;  // "extremely short" floor, seconds
    double short_max = 20.0;
    double medium_max = 40.0;
    double long_max = 60.0;
    int max_events = 3;
    double min_et_ratio = 0.08;
};

/// Half-open buckets (low, high]; 20 s is Short. Durations under the floor
/// or over the Long bound are Rejected. Throws NonPositiveDuration.
DurationBucket duration_bucket(double duration, const FilterConfig& config = {});

/// Merges same-category events whose intervals overlap by a positive
/// length into one event spanning the union hull, captions joined with
/// "; ". Output is sorted by (start, end, category).
std::vector<EventRecord> merge_overlapping_events(std::vector<EventRecord> events);

/// Union length of all event intervals divided by the video duration.
double et_ratio(const VideoRecord& record);

enum class RejectReason { Duration, EventCount, EtRatio };

const char* to_string(RejectReason reason);

struct KeptVideo {
    VideoRecord record;  // with merged events
    DurationBucket bucket = DurationBucket::Short;
};

struct RejectedVideo {
    std::string video_id;
    RejectReason reason;  // the first failing gate
};

struct FilterResult {
    std::vector<KeptVideo> kept;
    std::vector<RejectedVideo> rejected;
};

/// Merges events, then applies the three gates in order: duration bucket,
/// event count, ET ratio (>= min passes).
FilterResult filter_manifest(const std::vector<VideoRecord>& records,
                             const FilterConfig& config);

/// Per-video bounding-box annotations: timestamp -> object name -> box.
using VideoBoxes = std::map<double, std::map<std::string, BoundingBox>>;
using BoxSidecar = std::map<std::string, VideoBoxes>;

/// One generated question with its gold record and split bookkeeping.
struct QaRecord {
    GroundTruthRecord gold;
    std::string split = "unassigned";
};

/// Expands each event into the task questions its object labels allow:
/// a temporal, sounding-spatial and spatio-temporal question for
/// visible & audible objects, and a silent-spatial question for
/// visible-only objects. Question strings follow the fixed templates;
/// qa_ids are "{video_id}:{event_index}:{t|s|st}:{ordinal}". A record whose
/// events have no eligible objects yields an empty list.
std::vector<QaRecord> generate_qas(const VideoRecord& record,
                                   const BoxSidecar* boxes = nullptr);

/// Declared QA counts per (split, task), indexed Temporal, Spatial,
/// SpatioTemporal.
struct DeclaredCounts {
    std::array<long, 3> train{0, 0, 0};
    std::array<long, 3> test{0, 0, 0};
};

struct SplitReport {
    std::array<long, 3> train_actual{0, 0, 0};
    std::array<long, 3> test_actual{0, 0, 0};
    long unassigned_actual = 0;
    DeclaredCounts declared;
    long train_declared_total = 0;
    long test_declared_total = 0;
    long grand_declared_total = 0;
    long train_actual_total = 0;
    long test_actual_total = 0;
    long grand_actual_total = 0;
    bool consistent = false;                // every (split, task) cell matches
    std::vector<std::string> mismatches;    // one line per differing cell
};

SplitReport split_report(const std::vector<QaRecord>& qas, const DeclaredCounts& declared);

/// One video's scores from the two raters, 1-4 each.
struct RatingPair {
    std::string video_id;
    int rater_a = 0;
    int rater_b = 0;
};

struct QcReport {
    std::vector<std::string> kept_ids;  // per-video mean >= cutoff
    double mean_score = 0.0;            // over all rated videos
    double mean_kept_score = 0.0;       // over the kept set
    double kappa = 0.0;                 // quadratic-weighted Cohen's kappa
    bool kappa_degenerate = false;      // a constant rater: kappa reported as 0
};

/// Validates scores, filters on the per-video rater mean, and reports
/// inter-rater agreement. Throws InvalidScore outside {1,2,3,4}.
QcReport qc_aggregate(const std::vector<RatingPair>& ratings, double cutoff);

}  // namespace avground
