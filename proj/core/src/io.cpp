#include "avground/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "avground/errors.hpp"
#include "avground/grammar.hpp"

namespace avground {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path);
    return in;
}

[[noreturn]] void fail(const std::string& path, size_t line, const std::string& what) {
    throw SchemaError(path + ":" + std::to_string(line) + ": " + what);
}

json parse_json(const std::string& text, const std::string& path, size_t line) {
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) fail(path, line, "invalid JSON");
    return value;
}

double require_number(const json& j, const char* key, const std::string& path, size_t line) {
    if (!j.contains(key) || !j[key].is_number()) {
        fail(path, line, std::string("missing numeric field \"") + key + "\"");
    }
    return j[key].get<double>();
}

std::string require_string(const json& j, const char* key, const std::string& path,
                           size_t line) {
    if (!j.contains(key) || !j[key].is_string()) {
        fail(path, line, std::string("missing string field \"") + key + "\"");
    }
    return j[key].get<std::string>();
}

TimeInterval read_interval(const json& j, const std::string& path, size_t line) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        fail(path, line, "interval must be [start, end]");
    }
    double start = j[0].get<double>();
    double end = j[1].get<double>();
    if (start < 0 || end < start) fail(path, line, "interval must satisfy 0 <= start <= end");
    return TimeInterval(start, end);
}

BoundingBox read_box(const json& j, const std::string& path, size_t line) {
    if (!j.is_array() || j.size() != 4) fail(path, line, "box must be [x1,y1,x2,y2]");
    for (const auto& v : j) {
        if (!v.is_number()) fail(path, line, "box coordinates must be numbers");
    }
    BoundingBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                    j[3].get<double>()};
    if (!box.valid()) fail(path, line, "box must satisfy 0 <= x1 <= x2 and 0 <= y1 <= y2");
    return box;
}

std::vector<GtObject> read_objects(const json& j, const std::string& path, size_t line) {
    if (!j.is_array()) fail(path, line, "objects must be an array");
    std::vector<GtObject> objects;
    for (const auto& item : j) {
        if (!item.is_object()) fail(path, line, "object entries must be objects");
        std::string name = require_string(item, "name", path, line);
        std::string label_text = require_string(item, "label", path, line);
        auto label = parse_av_label(label_text);
        if (!label) fail(path, line, "unknown label \"" + label_text + "\"");
        std::string lowered;
        for (char c : name) lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        objects.push_back({lowered, *label});
    }
    return objects;
}

std::map<std::string, std::vector<TimedBox>> read_tracks(const json& j,
                                                         const std::string& path,
                                                         size_t line) {
    if (!j.is_object()) fail(path, line, "tracks must be an object");
    std::map<std::string, std::vector<TimedBox>> tracks;
    for (const auto& [name, frames] : j.items()) {
        if (!frames.is_object()) fail(path, line, "track frames must be an object");
        std::vector<TimedBox> track;
        for (const auto& [stamp, box] : frames.items()) {
            double t = 0.0;
            try {
                size_t used = 0;
                t = std::stod(stamp, &used);
                if (used != stamp.size()) throw std::invalid_argument(stamp);
            } catch (const std::exception&) {
                fail(path, line, "bad track timestamp \"" + stamp + "\"");
            }
            if (t < 0) fail(path, line, "negative track timestamp");
            track.push_back({canonical_seconds(t), read_box(box, path, line)});
        }
        std::sort(track.begin(), track.end(), [](const TimedBox& a, const TimedBox& b) {
            return a.timestamp < b.timestamp;
        });
        tracks[name] = std::move(track);
    }
    return tracks;
}

GroundTruthRecord read_ground_truth(const json& j, const std::string& path, size_t line,
                                    std::string* split_out) {
    GroundTruthRecord gt;
    gt.qa_id = require_string(j, "qa_id", path, line);
    std::string task = require_string(j, "task", path, line);
    auto kind = task_kind_from_string(task);
    if (!kind) fail(path, line, "unknown task \"" + task + "\"");
    gt.task_kind = *kind;
    gt.question = j.contains("question") ? require_string(j, "question", path, line) : "";
    gt.objects = read_objects(j.contains("objects") ? j["objects"] : json::array(), path, line);
    if (!j.contains("interval")) fail(path, line, "missing field \"interval\"");
    gt.interval = read_interval(j["interval"], path, line);
    gt.tracks = read_tracks(j.contains("tracks") ? j["tracks"] : json::object(), path, line);
    if (split_out != nullptr) {
        *split_out = j.contains("split") ? require_string(j, "split", path, line)
                                         : std::string("unassigned");
    }
    return gt;
}

ordered_json interval_json(const TimeInterval& interval) {
    return ordered_json::array({interval.start, interval.end});
}

ordered_json objects_json(const std::vector<GtObject>& objects) {
    ordered_json out = ordered_json::array();
    for (const GtObject& object : objects) {
        out.push_back({{"name", object.name}, {"label", to_string(object.label)}});
    }
    return out;
}

ordered_json tracks_json(const std::map<std::string, std::vector<TimedBox>>& tracks) {
    ordered_json out = ordered_json::object();
    for (const auto& [name, track] : tracks) {
        ordered_json frames = ordered_json::object();
        for (const TimedBox& tb : track) {
            frames[format_seconds(tb.timestamp)] =
                ordered_json::array({tb.box.x1, tb.box.y1, tb.box.x2, tb.box.y2});
        }
        out[name] = std::move(frames);
    }
    return out;
}

template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        fn(parse_json(line, path, line_no), line_no);
    }
}

}  // namespace

std::vector<GroundTruthRecord> load_ground_truth_jsonl(const std::string& path) {
    std::vector<GroundTruthRecord> records;
    for_each_jsonl(path, [&](const json& j, size_t line) {
        records.push_back(read_ground_truth(j, path, line, nullptr));
    });
    return records;
}

std::vector<Prediction> load_predictions_jsonl(const std::string& path) {
    std::vector<Prediction> predictions;
    for_each_jsonl(path, [&](const json& j, size_t line) {
        Prediction pred;
        pred.qa_id = require_string(j, "qa_id", path, line);
        pred.text = require_string(j, "text", path, line);
        predictions.push_back(std::move(pred));
    });
    return predictions;
}

std::vector<VideoRecord> load_manifest_json(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json root = parse_json(buffer.str(), path, 1);
    if (!root.is_array()) fail(path, 1, "manifest must be a JSON array");

    std::vector<VideoRecord> records;
    for (const auto& j : root) {
        VideoRecord record;
        record.video_id = require_string(j, "video_id", path, 1);
        record.duration = require_number(j, "duration", path, 1);
        if (!(record.duration > 0)) {
            throw NonPositiveDuration(path + ": video \"" + record.video_id +
                                      "\" has non-positive duration");
        }
        if (j.contains("split")) {
            record.split = require_string(j, "split", path, 1);
            if (record.split != "train" && record.split != "test" &&
                record.split != "unassigned") {
                fail(path, 1, "unknown split \"" + record.split + "\"");
            }
        }
        if (j.contains("events")) {
            if (!j["events"].is_array()) fail(path, 1, "events must be an array");
            for (const auto& e : j["events"]) {
                EventRecord event;
                event.category = e.contains("category") ? require_string(e, "category", path, 1)
                                                        : "";
                event.caption = e.contains("caption") ? require_string(e, "caption", path, 1)
                                                      : "";
                if (!e.contains("interval")) fail(path, 1, "event missing \"interval\"");
                event.interval = read_interval(e["interval"], path, 1);
                if (event.interval.end > record.duration + 1e-9) {
                    fail(path, 1, "event interval exceeds duration of \"" +
                                      record.video_id + "\"");
                }
                event.objects =
                    read_objects(e.contains("objects") ? e["objects"] : json::array(), path, 1);
                record.events.push_back(std::move(event));
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

void write_manifest_json(std::ostream& out, const std::vector<KeptVideo>& kept) {
    ordered_json root = ordered_json::array();
    for (const KeptVideo& video : kept) {
        ordered_json events = ordered_json::array();
        for (const EventRecord& event : video.record.events) {
            events.push_back({{"category", event.category},
                              {"caption", event.caption},
                              {"interval", interval_json(event.interval)},
                              {"objects", objects_json(event.objects)}});
        }
        root.push_back({{"video_id", video.record.video_id},
                        {"duration", video.record.duration},
                        {"split", video.record.split},
                        {"bucket", to_string(video.bucket)},
                        {"events", std::move(events)}});
    }
    out << root.dump(2) << "\n";
}

void write_rejects_json(std::ostream& out, const std::vector<RejectedVideo>& rejected) {
    ordered_json root = ordered_json::array();
    for (const RejectedVideo& video : rejected) {
        root.push_back({{"video_id", video.video_id}, {"reason", to_string(video.reason)}});
    }
    out << root.dump(2) << "\n";
}

BoxSidecar load_box_sidecar_json(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json root = parse_json(buffer.str(), path, 1);
    if (!root.is_array()) fail(path, 1, "box sidecar must be a JSON array");

    BoxSidecar sidecar;
    for (const auto& j : root) {
        std::string video_id = require_string(j, "video_id", path, 1);
        if (!j.contains("frames") || !j["frames"].is_object()) {
            fail(path, 1, "missing \"frames\" object");
        }
        VideoBoxes& boxes = sidecar[video_id];
        for (const auto& [stamp, frame] : j["frames"].items()) {
            double t = 0.0;
            try {
                size_t used = 0;
                t = std::stod(stamp, &used);
                if (used != stamp.size()) throw std::invalid_argument(stamp);
            } catch (const std::exception&) {
                fail(path, 1, "bad frame timestamp \"" + stamp + "\"");
            }
            if (t < 0) fail(path, 1, "negative frame timestamp");
            if (!frame.is_object()) fail(path, 1, "frame must map object -> box");
            auto& at = boxes[canonical_seconds(t)];
            for (const auto& [name, box] : frame.items()) {
                std::string lowered;
                for (char c : name) {
                    lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                }
                at[lowered] = read_box(box, path, 1);
            }
        }
    }
    return sidecar;
}

std::vector<QaRecord> load_qa_jsonl(const std::string& path) {
    std::vector<QaRecord> qas;
    for_each_jsonl(path, [&](const json& j, size_t line) {
        QaRecord qa;
        qa.gold = read_ground_truth(j, path, line, &qa.split);
        qas.push_back(std::move(qa));
    });
    return qas;
}

void write_qa_jsonl(std::ostream& out, const std::vector<QaRecord>& qas) {
    for (const QaRecord& qa : qas) {
        ordered_json j;
        j["qa_id"] = qa.gold.qa_id;
        j["task"] = to_string(qa.gold.task_kind);
        j["split"] = qa.split;
        j["question"] = qa.gold.question;
        j["objects"] = objects_json(qa.gold.objects);
        j["interval"] = interval_json(qa.gold.interval);
        j["tracks"] = tracks_json(qa.gold.tracks);
        out << j.dump() << "\n";
    }
}

std::vector<RatingPair> load_ratings_csv(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    size_t line_no = 0;
    std::vector<RatingPair> ratings;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line == "video_id,rater_a,rater_b") continue;
        std::istringstream ls(line);
        RatingPair rating;
        std::string a;
        std::string b;
        if (!std::getline(ls, rating.video_id, ',') || !std::getline(ls, a, ',') ||
            !std::getline(ls, b)) {
            fail(path, line_no, "expected video_id,rater_a,rater_b");
        }
        try {
            rating.rater_a = std::stoi(a);
            rating.rater_b = std::stoi(b);
        } catch (const std::exception&) {
            fail(path, line_no, "ratings must be integers");
        }
        ratings.push_back(std::move(rating));
    }
    return ratings;
}

DeclaredCounts load_declared_counts_json(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json root = parse_json(buffer.str(), path, 1);
    if (!root.is_object()) fail(path, 1, "declared counts must be a JSON object");

    DeclaredCounts counts;
    auto read_split = [&](const char* split, std::array<long, 3>& out) {
        if (!root.contains(split)) return;
        const json& j = root[split];
        if (!j.is_object()) fail(path, 1, std::string("\"") + split + "\" must be an object");
        static constexpr const char* kKeys[] = {"temporal", "spatial", "spatio-temporal"};
        for (size_t i = 0; i < 3; ++i) {
            if (!j.contains(kKeys[i])) continue;
            if (!j[kKeys[i]].is_number_integer()) {
                fail(path, 1, std::string("\"") + kKeys[i] + "\" must be an integer");
            }
            out[i] = j[kKeys[i]].get<long>();
        }
        for (const auto& [key, value] : j.items()) {
            if (key != "temporal" && key != "spatial" && key != "spatio-temporal") {
                fail(path, 1, "unknown task \"" + key + "\"");
            }
        }
    };
    read_split("train", counts.train);
    read_split("test", counts.test);
    for (const auto& [key, value] : root.items()) {
        if (key != "train" && key != "test") fail(path, 1, "unknown split \"" + key + "\"");
    }
    return counts;
}

std::string split_report_to_json(const SplitReport& report) {
    static constexpr const char* kKeys[] = {"temporal", "spatial", "spatio-temporal"};
    ordered_json j;
    auto cells = [&](const std::array<long, 3>& declared, const std::array<long, 3>& actual,
                     long declared_total, long actual_total) {
        ordered_json out;
        for (size_t i = 0; i < 3; ++i) {
            out[kKeys[i]] = {{"declared", declared[i]}, {"actual", actual[i]}};
        }
        out["total"] = {{"declared", declared_total}, {"actual", actual_total}};
        return out;
    };
    j["train"] = cells(report.declared.train, report.train_actual,
                       report.train_declared_total, report.train_actual_total);
    j["test"] = cells(report.declared.test, report.test_actual, report.test_declared_total,
                      report.test_actual_total);
    j["grand_total"] = {{"declared", report.grand_declared_total},
                        {"actual", report.grand_actual_total}};
    j["unassigned"] = report.unassigned_actual;
    j["consistent"] = report.consistent;
    j["mismatches"] = report.mismatches;
    return j.dump(2) + "\n";
}

std::string qc_report_to_json(const QcReport& report) {
    ordered_json j;
    j["kept"] = report.kept_ids;
    j["kept_count"] = report.kept_ids.size();
    j["mean_score"] = report.mean_score;
    j["mean_kept_score"] = report.mean_kept_score;
    j["kappa"] = report.kappa;
    j["kappa_degenerate"] = report.kappa_degenerate;
    return j.dump(2) + "\n";
}

std::string breakdown_jsonl_line(const std::string& qa_id, const RewardBreakdown& b) {
    ordered_json j;
    j["qa_id"] = qa_id;
    j["format"] = b.format;
    j["object"] = b.object;
    j["temporal"] = b.temporal;
    j["spatial"] = b.spatial;
    j["total"] = b.total;
    return j.dump();
}

}  // namespace avground
