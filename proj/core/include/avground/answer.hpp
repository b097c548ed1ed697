#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace avground {

/// The three reasoning task families a question can belong to.
enum class TaskKind { Temporal, Spatial, SpatioTemporal };

const char* to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view text);

/// Audio-visual attribute of an annotated object.
enum class AvLabel { VisibleOnly, VisibleAudible };

const char* to_string(AvLabel label);

/// Truncates a time in seconds toward zero onto the canonical 0.1 s grid.
double canonical_seconds(double seconds);

/// Renders a canonical time with exactly one decimal digit, e.g. "10.0".
std::string format_seconds(double seconds);

/// A [start, end] segment in seconds. Values are canonicalized to one
/// decimal digit (truncation toward zero) on construction.
struct TimeInterval {
    double start = 0.0;
    double end = 0.0;

    TimeInterval() = default;
    TimeInterval(double start_s, double end_s);

    double length() const { return end - start; }
    bool contains(double t) const;

    bool operator==(const TimeInterval&) const = default;
};

/// Axis-aligned pixel box with x2 >= x1 and y2 >= y1.
struct BoundingBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double area() const { return (x2 - x1) * (y2 - y1); }
    bool valid() const { return x1 >= 0 && y1 >= 0 && x2 >= x1 && y2 >= y1; }

    bool operator==(const BoundingBox&) const = default;
};

/// One box at one canonical timestamp.
struct TimedBox {
    double timestamp = 0.0;
    BoundingBox box;

    bool operator==(const TimedBox&) const = default;
};

/// A named object with its per-timestamp boxes, timestamps strictly
/// increasing. The box list may be empty (temporal-only answers).
struct ObjectTrack {
    std::string name;
    std::vector<TimedBox> boxes;

    bool operator==(const ObjectTrack&) const = default;
};

/// Parsed payload of one <answer> block.
struct StructuredAnswer {
    TaskKind task_kind = TaskKind::Temporal;
    std::optional<TimeInterval> interval;
    std::vector<ObjectTrack> tracks;

    bool operator==(const StructuredAnswer&) const = default;
};

/// One "Entity - Label" line of a caption-analyzer output.
struct CaptionSubject {
    std::string name;
    AvLabel label = AvLabel::VisibleOnly;

    bool operator==(const CaptionSubject&) const = default;
};

/// Parsed caption-analyzer output: subjects plus the declared count.
struct CaptionAnalysis {
    std::vector<CaptionSubject> subjects;
    int subject_count = 0;

    bool operator==(const CaptionAnalysis&) const = default;
};

}  // namespace avground
