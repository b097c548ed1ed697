#include "avground/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "avground/errors.hpp"
#include "avground/grammar.hpp"

namespace avground {

const char* to_string(DurationBucket bucket) {
    switch (bucket) {
        case DurationBucket::Short: return "short";
        case DurationBucket::Medium: return "medium";
        case DurationBucket::Long: return "long";
        case DurationBucket::Rejected: return "rejected";
    }
    return "";
}

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::Duration: return "duration";
        case RejectReason::EventCount: return "event_count";
        case RejectReason::EtRatio: return "et_ratio";
    }
    return "";
}

DurationBucket duration_bucket(double duration, const FilterConfig& config) {
    if (!(duration > 0.0)) {
        throw NonPositiveDuration("duration must be positive, got " +
                                  std::to_string(duration));
    }
    if (duration < config.min_duration) return DurationBucket::Rejected;
    if (duration <= config.short_max) return DurationBucket::Short;
    if (duration <= config.medium_max) return DurationBucket::Medium;
    if (duration <= config.long_max) return DurationBucket::Long;
    return DurationBucket::Rejected;
}

std::vector<EventRecord> merge_overlapping_events(std::vector<EventRecord> events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                         if (a.category != b.category) return a.category < b.category;
                         if (a.interval.start != b.interval.start) {
                             return a.interval.start < b.interval.start;
                         }
                         return a.interval.end < b.interval.end;
                     });
    std::vector<EventRecord> merged;
    for (EventRecord& event : events) {
        bool absorbed = false;
        if (!merged.empty()) {
            EventRecord& last = merged.back();
            // Same category and a positive-length overlap; touching
            // intervals stay separate events.
            if (last.category == event.category &&
                event.interval.start < last.interval.end) {
                last.interval = TimeInterval(last.interval.start,
                                             std::max(last.interval.end, event.interval.end));
                last.caption += "; " + event.caption;
                for (GtObject& object : event.objects) {
                    if (std::find(last.objects.begin(), last.objects.end(), object) ==
                        last.objects.end()) {
                        last.objects.push_back(std::move(object));
                    }
                }
                absorbed = true;
            }
        }
        if (!absorbed) merged.push_back(std::move(event));
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                         if (a.interval.start != b.interval.start) {
                             return a.interval.start < b.interval.start;
                         }
                         if (a.interval.end != b.interval.end) {
                             return a.interval.end < b.interval.end;
                         }
                         return a.category < b.category;
                     });
    return merged;
}

double et_ratio(const VideoRecord& record) {
    if (!(record.duration > 0.0)) {
        throw NonPositiveDuration("et_ratio: duration must be positive");
    }
    std::vector<TimeInterval> intervals;
    intervals.reserve(record.events.size());
    for (const EventRecord& event : record.events) intervals.push_back(event.interval);
    std::sort(intervals.begin(), intervals.end(),
              [](const TimeInterval& a, const TimeInterval& b) {
                  return a.start != b.start ? a.start < b.start : a.end < b.end;
              });
    double covered = 0.0;
    double open_start = 0.0;
    double open_end = -1.0;
    for (const TimeInterval& interval : intervals) {
        if (open_end < open_start || interval.start > open_end) {
            if (open_end >= open_start) covered += open_end - open_start;
            open_start = interval.start;
            open_end = interval.end;
        } else {
            open_end = std::max(open_end, interval.end);
        }
    }
    if (open_end >= open_start && !intervals.empty()) covered += open_end - open_start;
    return std::min(1.0, covered / record.duration);
}

FilterResult filter_manifest(const std::vector<VideoRecord>& records,
                             const FilterConfig& config) {
    FilterResult result;
    for (const VideoRecord& original : records) {
        VideoRecord record = original;
        record.events = merge_overlapping_events(std::move(record.events));

        DurationBucket bucket = duration_bucket(record.duration, config);
        if (bucket == DurationBucket::Rejected) {
            result.rejected.push_back({record.video_id, RejectReason::Duration});
            continue;
        }
        if (static_cast<int>(record.events.size()) > config.max_events) {
            result.rejected.push_back({record.video_id, RejectReason::EventCount});
            continue;
        }
        if (et_ratio(record) < config.min_et_ratio) {
            result.rejected.push_back({record.video_id, RejectReason::EtRatio});
            continue;
        }
        result.kept.push_back({std::move(record), bucket});
    }
    return result;
}

namespace {

std::string join_names(const std::vector<GtObject>& objects) {
    std::string out;
    for (const GtObject& object : objects) {
        if (!out.empty()) out += ", ";
        out += object.name;
    }
    return out;
}

std::map<std::string, std::vector<TimedBox>> tracks_for(
    const VideoBoxes* boxes, const std::vector<GtObject>& objects,
    const TimeInterval& interval) {
    std::map<std::string, std::vector<TimedBox>> tracks;
    if (boxes == nullptr) return tracks;
    for (const GtObject& object : objects) {
        std::vector<TimedBox> track;
        for (const auto& [timestamp, frame] : *boxes) {
            if (!interval.contains(timestamp)) continue;
            auto it = frame.find(object.name);
            if (it != frame.end()) track.push_back({timestamp, it->second});
        }
        if (!track.empty()) tracks[object.name] = std::move(track);
    }
    return tracks;
}

}  // namespace

std::vector<QaRecord> generate_qas(const VideoRecord& record, const BoxSidecar* boxes) {
    const VideoBoxes* video_boxes = nullptr;
    if (boxes != nullptr) {
        auto it = boxes->find(record.video_id);
        if (it != boxes->end()) video_boxes = &it->second;
    }

    std::vector<QaRecord> qas;
    for (size_t index = 0; index < record.events.size(); ++index) {
        const EventRecord& event = record.events[index];
        std::vector<GtObject> sounding;
        std::vector<GtObject> silent;
        for (const GtObject& object : event.objects) {
            (object.label == AvLabel::VisibleAudible ? sounding : silent).push_back(object);
        }

        std::string prefix = record.video_id + ":" + std::to_string(index) + ":";
        std::string start = format_seconds(event.interval.start);
        std::string end = format_seconds(event.interval.end);

        auto emit = [&](const std::string& qa_id, TaskKind kind, std::string question,
                        const std::vector<GtObject>& objects) {
            QaRecord qa;
            qa.split = record.split;
            qa.gold.qa_id = qa_id;
            qa.gold.task_kind = kind;
            qa.gold.question = std::move(question);
            qa.gold.objects = objects;
            qa.gold.interval = event.interval;
            qa.gold.tracks = tracks_for(video_boxes, objects, event.interval);
            qas.push_back(std::move(qa));
        };

        if (!sounding.empty()) {
            std::string names = join_names(sounding);
            emit(prefix + "t:0", TaskKind::Temporal,
                 "When is the moment " + names + " make sound and are visible?", sounding);
            emit(prefix + "s:0", TaskKind::Spatial,
                 "What objects make sound between " + start + " and " + end +
                     ", and where are they?",
                 sounding);
            emit(prefix + "st:0", TaskKind::SpatioTemporal,
                 "When is the moment " + names +
                     " make sound and are visible, and where are they?",
                 sounding);
        }
        if (!silent.empty()) {
            emit(prefix + "s:1", TaskKind::Spatial,
                 "What silent objects can be seen between " + start + " and " + end +
                     ", and where are they?",
                 silent);
        }
    }
    return qas;
}

SplitReport split_report(const std::vector<QaRecord>& qas, const DeclaredCounts& declared) {
    SplitReport report;
    report.declared = declared;
    for (const QaRecord& qa : qas) {
        size_t task = static_cast<size_t>(qa.gold.task_kind);
        if (qa.split == "train") {
            ++report.train_actual[task];
        } else if (qa.split == "test") {
            ++report.test_actual[task];
        } else {
            ++report.unassigned_actual;
        }
    }
    for (size_t task = 0; task < 3; ++task) {
        report.train_declared_total += declared.train[task];
        report.test_declared_total += declared.test[task];
        report.train_actual_total += report.train_actual[task];
        report.test_actual_total += report.test_actual[task];
    }
    report.grand_declared_total = report.train_declared_total + report.test_declared_total;
    report.grand_actual_total = report.train_actual_total + report.test_actual_total;

    static constexpr TaskKind kTasks[] = {TaskKind::Temporal, TaskKind::Spatial,
                                          TaskKind::SpatioTemporal};
    for (size_t task = 0; task < 3; ++task) {
        if (report.train_actual[task] != declared.train[task]) {
            report.mismatches.push_back(
                "train/" + std::string(to_string(kTasks[task])) + ": declared " +
                std::to_string(declared.train[task]) + ", actual " +
                std::to_string(report.train_actual[task]));
        }
        if (report.test_actual[task] != declared.test[task]) {
            report.mismatches.push_back(
                "test/" + std::string(to_string(kTasks[task])) + ": declared " +
                std::to_string(declared.test[task]) + ", actual " +
                std::to_string(report.test_actual[task]));
        }
    }
    report.consistent = report.mismatches.empty();
    return report;
}

QcReport qc_aggregate(const std::vector<RatingPair>& ratings, double cutoff) {
    QcReport report;
    if (ratings.empty()) {
        report.kappa_degenerate = true;
        return report;
    }

    long counts[4][4] = {};
    double mean_sum = 0.0;
    double kept_sum = 0.0;
    for (const RatingPair& rating : ratings) {
        for (int score : {rating.rater_a, rating.rater_b}) {
            if (score < 1 || score > 4) {
                throw InvalidScore("rating for \"" + rating.video_id +
                                   "\" outside 1-4: " + std::to_string(score));
            }
        }
        ++counts[rating.rater_a - 1][rating.rater_b - 1];
        double mean = (rating.rater_a + rating.rater_b) / 2.0;
        mean_sum += mean;
        if (mean >= cutoff - 1e-12) {
            report.kept_ids.push_back(rating.video_id);
            kept_sum += mean;
        }
    }
    report.mean_score = mean_sum / static_cast<double>(ratings.size());
    report.mean_kept_score =
        report.kept_ids.empty() ? 0.0
                                : kept_sum / static_cast<double>(report.kept_ids.size());

    // kappa = 1 - sum(w * observed) / sum(w * expected), quadratic weights.
    // A rater without variance makes chance agreement ill-defined.
    long n = static_cast<long>(ratings.size());
    long row[4] = {};
    long col[4] = {};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            row[i] += counts[i][j];
            col[j] += counts[i][j];
        }
    }
    bool constant_a = std::count_if(row, row + 4, [](long c) { return c > 0; }) <= 1;
    bool constant_b = std::count_if(col, col + 4, [](long c) { return c > 0; }) <= 1;
    if (constant_a || constant_b) {
        report.kappa = 0.0;
        report.kappa_degenerate = true;
        return report;
    }
    double observed = 0.0;
    double expected = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double w = static_cast<double>((i - j) * (i - j));
            observed += w * static_cast<double>(counts[i][j]);
            expected += w * static_cast<double>(row[i]) * static_cast<double>(col[j]) /
                        static_cast<double>(n);
        }
    }
    report.kappa = 1.0 - observed / expected;
    return report;
}

}  // namespace avground
