#include "avground/grammar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace avground {

namespace {

constexpr double kMaxSeconds = 1e9;  // keeps the 0.1 s grid exact in doubles

std::string_view trim(std::string_view s) {
    size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    size_t e = s.size();
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool parse_double(std::string_view token, double& out) {
    token = trim(token);
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

enum class Tag { When, Object, Where };

constexpr std::string_view open_token(Tag t) {
    switch (t) {
        case Tag::When: return "<when>";
        case Tag::Object: return "<object>";
        case Tag::Where: return "<where>";
    }
    return {};
}

constexpr std::string_view close_token(Tag t) {
    switch (t) {
        case Tag::When: return "</when>";
        case Tag::Object: return "</object>";
        case Tag::Where: return "</where>";
    }
    return {};
}

constexpr const char* tag_name(Tag t) {
    switch (t) {
        case Tag::When: return "when";
        case Tag::Object: return "object";
        case Tag::Where: return "where";
    }
    return "";
}

struct Token {
    size_t pos;
    Tag tag;
    bool closing;
    bool answer_open;  // a stray nested <answer>
};

// Finds the next known tag token at or after `from`; unknown text is skipped.
std::optional<Token> next_token(std::string_view s, size_t from) {
    for (size_t i = s.find('<', from); i != std::string_view::npos; i = s.find('<', i + 1)) {
        std::string_view rest = s.substr(i);
        if (rest.starts_with(kAnswerOpen) || rest.starts_with(kAnswerClose)) {
            return Token{i, Tag::When, false, true};
        }
        for (Tag t : {Tag::When, Tag::Object, Tag::Where}) {
            if (rest.starts_with(open_token(t))) return Token{i, t, false, false};
            if (rest.starts_with(close_token(t))) return Token{i, t, true, false};
        }
    }
    return std::nullopt;
}

// "[a,b]" with arbitrary interior whitespace -> values; used for <when>.
std::optional<FormatError> parse_interval_body(std::string_view body, TimeInterval& out) {
    body = trim(body);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
        return FormatError{FormatErrorCode::BadInterval, "expected [start,end]"};
    }
    std::string_view inner = body.substr(1, body.size() - 2);
    size_t comma = inner.find(',');
    if (comma == std::string_view::npos || inner.find(',', comma + 1) != std::string_view::npos) {
        return FormatError{FormatErrorCode::BadInterval, "expected exactly two numbers"};
    }
    double start = 0.0;
    double end = 0.0;
    if (!parse_double(inner.substr(0, comma), start)) {
        return FormatError{FormatErrorCode::BadNumber, std::string(trim(inner.substr(0, comma)))};
    }
    if (!parse_double(inner.substr(comma + 1), end)) {
        return FormatError{FormatErrorCode::BadNumber, std::string(trim(inner.substr(comma + 1)))};
    }
    if (start < 0.0 || end < start || end > kMaxSeconds) {
        return FormatError{FormatErrorCode::BadInterval,
                           "interval must satisfy 0 <= start <= end"};
    }
    out = TimeInterval(start, end);
    return std::nullopt;
}

// One "timestamp: [x1,y1,x2,y2]" line of a <where> block.
std::optional<FormatError> parse_box_line(std::string_view line, TimedBox& out) {
    size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
        return FormatError{FormatErrorCode::BadBox, "expected \"timestamp: [x1,y1,x2,y2]\""};
    }
    double t = 0.0;
    if (!parse_double(line.substr(0, colon), t)) {
        return FormatError{FormatErrorCode::BadNumber, std::string(trim(line.substr(0, colon)))};
    }
    if (t < 0.0 || t > kMaxSeconds) {
        return FormatError{FormatErrorCode::BadBox, "timestamp out of range"};
    }
    std::string_view body = trim(line.substr(colon + 1));
    if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
        return FormatError{FormatErrorCode::BadBox, "expected [x1,y1,x2,y2]"};
    }
    std::string_view inner = body.substr(1, body.size() - 2);
    std::array<double, 4> coords{};
    size_t begin = 0;
    for (int i = 0; i < 4; ++i) {
        size_t comma = inner.find(',', begin);
        bool last = i == 3;
        if (!last && comma == std::string_view::npos) {
            return FormatError{FormatErrorCode::BadBox, "expected four coordinates"};
        }
        if (last && comma != std::string_view::npos) {
            return FormatError{FormatErrorCode::BadBox, "expected four coordinates"};
        }
        std::string_view token =
            last ? inner.substr(begin) : inner.substr(begin, comma - begin);
        if (!parse_double(token, coords[i])) {
            return FormatError{FormatErrorCode::BadNumber, std::string(trim(token))};
        }
        begin = comma + 1;
    }
    BoundingBox box{coords[0], coords[1], coords[2], coords[3]};
    if (!box.valid()) {
        return FormatError{FormatErrorCode::BadBox,
                           "box must satisfy 0 <= x1 <= x2 and 0 <= y1 <= y2"};
    }
    out = TimedBox{canonical_seconds(t), box};
    return std::nullopt;
}

std::optional<FormatError> parse_where_body(std::string_view body,
                                            std::vector<TimedBox>& out) {
    out.clear();
    size_t pos = 0;
    while (pos <= body.size()) {
        size_t nl = body.find('\n', pos);
        std::string_view line = nl == std::string_view::npos
                                    ? body.substr(pos)
                                    : body.substr(pos, nl - pos);
        line = trim(line);
        if (!line.empty()) {
            TimedBox tb;
            if (auto err = parse_box_line(line, tb)) return err;
            if (!out.empty() && tb.timestamp <= out.back().timestamp) {
                return FormatError{FormatErrorCode::BadBox,
                                   "timestamps must be strictly increasing"};
            }
            out.push_back(tb);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (out.empty()) {
        return FormatError{FormatErrorCode::BadBox, "empty <where> block"};
    }
    return std::nullopt;
}

std::optional<FormatError> parse_object_names(std::string_view body,
                                              std::vector<std::string>& out) {
    out.clear();
    size_t begin = 0;
    while (begin <= body.size()) {
        size_t comma = body.find(',', begin);
        std::string_view piece = comma == std::string_view::npos
                                     ? body.substr(begin)
                                     : body.substr(begin, comma - begin);
        std::string name = lowercase(trim(piece));
        if (name.empty()) {
            return FormatError{FormatErrorCode::MissingTag, "empty object name"};
        }
        out.push_back(std::move(name));
        if (comma == std::string_view::npos) break;
        begin = comma + 1;
    }
    return std::nullopt;
}

}  // namespace

const char* to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Temporal: return "temporal";
        case TaskKind::Spatial: return "spatial";
        case TaskKind::SpatioTemporal: return "spatio-temporal";
    }
    return "";
}

std::optional<TaskKind> task_kind_from_string(std::string_view text) {
    if (text == "temporal") return TaskKind::Temporal;
    if (text == "spatial") return TaskKind::Spatial;
    if (text == "spatio-temporal") return TaskKind::SpatioTemporal;
    return std::nullopt;
}

const char* to_string(AvLabel label) {
    return label == AvLabel::VisibleOnly ? "visible-only" : "visible & audible";
}

double canonical_seconds(double seconds) {
    double scaled = seconds * 10.0;
    double grid = seconds >= 0.0 ? std::floor(scaled + 1e-9) : std::ceil(scaled - 1e-9);
    return grid / 10.0;
}

std::string format_seconds(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", seconds);
    return buf;
}

TimeInterval::TimeInterval(double start_s, double end_s)
    : start(canonical_seconds(start_s)), end(canonical_seconds(end_s)) {}

bool TimeInterval::contains(double t) const {
    return t >= start - 1e-9 && t <= end + 1e-9;
}

const char* to_string(FormatErrorCode code) {
    switch (code) {
        case FormatErrorCode::MissingTag: return "missing_tag";
        case FormatErrorCode::UnbalancedTag: return "unbalanced_tag";
        case FormatErrorCode::BadNumber: return "bad_number";
        case FormatErrorCode::BadBox: return "bad_box";
        case FormatErrorCode::BadInterval: return "bad_interval";
        case FormatErrorCode::UnknownLabel: return "unknown_label";
        case FormatErrorCode::CountMismatch: return "count_mismatch";
        case FormatErrorCode::NoSubjectsHeader: return "no_subjects_header";
    }
    return "";
}

std::string FormatError::message() const {
    std::string out = to_string(code);
    if (!detail.empty()) {
        out += ": ";
        out += detail;
    }
    return out;
}

namespace detail {

Parsed<AnswerWithTags> parse_with_tags(std::string_view text, TaskKind task_kind) {
    size_t open = text.find(kAnswerOpen);
    if (open == std::string_view::npos) {
        return FormatError{FormatErrorCode::MissingTag, "answer"};
    }
    size_t body_begin = open + kAnswerOpen.size();
    size_t close = text.find(kAnswerClose, body_begin);
    if (close == std::string_view::npos) {
        return FormatError{FormatErrorCode::UnbalancedTag, "answer"};
    }
    std::string_view inner = text.substr(body_begin, close - body_begin);

    std::optional<TimeInterval> interval;
    TagPresence present;

    // Names of one <object> tag plus the <where> blocks that followed it.
    struct Group {
        std::vector<std::string> names;
        std::vector<std::vector<TimedBox>> blocks;
    };
    std::vector<Group> groups;

    size_t cursor = 0;
    while (auto tok = next_token(inner, cursor)) {
        if (tok->answer_open) {
            return FormatError{FormatErrorCode::UnbalancedTag, "answer"};
        }
        if (tok->closing) {
            return FormatError{FormatErrorCode::UnbalancedTag, tag_name(tok->tag)};
        }
        Tag tag = tok->tag;
        size_t content_begin = tok->pos + open_token(tag).size();
        size_t content_end = inner.find(close_token(tag), content_begin);
        if (content_end == std::string_view::npos) {
            return FormatError{FormatErrorCode::UnbalancedTag, tag_name(tag)};
        }
        std::string_view content = inner.substr(content_begin, content_end - content_begin);
        // Tags never nest: any known token inside the content is a violation.
        if (auto intruder = next_token(content, 0)) {
            const char* name = intruder->answer_open ? "answer" : tag_name(intruder->tag);
            return FormatError{FormatErrorCode::UnbalancedTag, name};
        }
        switch (tag) {
            case Tag::When: {
                if (present.when) {
                    return FormatError{FormatErrorCode::BadInterval, "duplicate <when>"};
                }
                TimeInterval value;
                if (auto err = parse_interval_body(content, value)) return *err;
                interval = value;
                present.when = true;
                break;
            }
            case Tag::Object: {
                Group group;
                if (auto err = parse_object_names(content, group.names)) return *err;
                groups.push_back(std::move(group));
                break;
            }
            case Tag::Where: {
                if (groups.empty()) {
                    return FormatError{FormatErrorCode::MissingTag,
                                       "<where> before any <object>"};
                }
                std::vector<TimedBox> boxes;
                if (auto err = parse_where_body(content, boxes)) return *err;
                groups.back().blocks.push_back(std::move(boxes));
                present.where = true;
                break;
            }
        }
        cursor = content_end + close_token(tag).size();
    }

    if (groups.empty()) {
        return FormatError{FormatErrorCode::MissingTag, "object"};
    }

    StructuredAnswer answer;
    answer.task_kind = task_kind;
    answer.interval = interval;
    for (auto& group : groups) {
        size_t n = group.names.size();
        size_t m = group.blocks.size();
        if (m > n) {
            return FormatError{FormatErrorCode::MissingTag,
                               "more <where> blocks than object names"};
        }
        for (size_t i = 0; i < n; ++i) {
            ObjectTrack track;
            track.name = std::move(group.names[i]);
            if (m == 1) {
                track.boxes = group.blocks[0];  // one block shared by all names
            } else if (i < m) {
                track.boxes = std::move(group.blocks[i]);
            }
            answer.tracks.push_back(std::move(track));
        }
    }

    bool has_boxes = std::any_of(answer.tracks.begin(), answer.tracks.end(),
                                 [](const ObjectTrack& t) { return !t.boxes.empty(); });
    if (task_kind != TaskKind::Spatial && !answer.interval) {
        return FormatError{FormatErrorCode::MissingTag, "when"};
    }
    if (task_kind != TaskKind::Temporal && !has_boxes) {
        return FormatError{FormatErrorCode::MissingTag, "where"};
    }
    return AnswerWithTags{std::move(answer), present};
}

}  // namespace detail

Parsed<StructuredAnswer> parse_answer(std::string_view text, TaskKind task_kind) {
    auto parsed = detail::parse_with_tags(text, task_kind);
    if (!parsed.ok()) return parsed.error();
    return std::move(parsed).value().answer;
}

bool check_format(std::string_view text, TaskKind task_kind) {
    auto parsed = detail::parse_with_tags(text, task_kind);
    if (!parsed.ok()) return false;
    const detail::TagPresence& present = parsed.value().tags;
    bool need_when = task_kind != TaskKind::Spatial;
    bool need_where = task_kind != TaskKind::Temporal;
    return present.when == need_when && present.where == need_where;
}

namespace {

std::string format_coordinate(double v) {
    if (v == std::floor(v) && std::abs(v) < 9.0e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void validate_for_serialization(const StructuredAnswer& answer) {
    if (answer.interval) {
        if (answer.interval->start < 0 || answer.interval->end < answer.interval->start) {
            throw std::invalid_argument("serialize_answer: invalid interval");
        }
    }
    bool has_boxes = false;
    for (const ObjectTrack& track : answer.tracks) {
        if (std::string(trim(track.name)).empty()) {
            throw std::invalid_argument("serialize_answer: empty track name");
        }
        double prev = -1.0;
        for (const TimedBox& tb : track.boxes) {
            if (tb.timestamp < 0 || tb.timestamp <= prev || !tb.box.valid()) {
                throw std::invalid_argument("serialize_answer: invalid track boxes");
            }
            prev = tb.timestamp;
            has_boxes = true;
        }
    }
    if (answer.tracks.empty()) {
        throw std::invalid_argument("serialize_answer: answer has no tracks");
    }
    switch (answer.task_kind) {
        case TaskKind::Temporal:
            if (!answer.interval) throw std::invalid_argument("serialize_answer: missing interval");
            break;
        case TaskKind::Spatial:
            if (!has_boxes) throw std::invalid_argument("serialize_answer: missing boxes");
            break;
        case TaskKind::SpatioTemporal:
            if (!answer.interval || !has_boxes) {
                throw std::invalid_argument("serialize_answer: missing interval or boxes");
            }
            break;
    }
}

}  // namespace

std::string serialize_answer(const StructuredAnswer& answer) {
    validate_for_serialization(answer);
    std::string out = "<answer>\n";
    if (answer.interval) {
        out += "<when>[" + format_seconds(answer.interval->start) + "," +
               format_seconds(answer.interval->end) + "]</when>\n";
    }
    for (const ObjectTrack& track : answer.tracks) {
        out += "<object> " + track.name + " </object>\n";
        if (track.boxes.empty()) continue;
        out += "<where>\n";
        for (const TimedBox& tb : track.boxes) {
            out += format_seconds(tb.timestamp) + ": [" + format_coordinate(tb.box.x1) +
                   "," + format_coordinate(tb.box.y1) + "," + format_coordinate(tb.box.x2) +
                   "," + format_coordinate(tb.box.y2) + "]\n";
        }
        out += "</where>\n";
    }
    out += "</answer>\n";
    return out;
}

std::optional<AvLabel> parse_av_label(std::string_view text) {
    std::string compact;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            compact += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (compact == "visible-only") return AvLabel::VisibleOnly;
    if (compact == "visible&audible") return AvLabel::VisibleAudible;
    return std::nullopt;
}

Parsed<CaptionAnalysis> parse_caption_analysis(std::string_view text) {
    CaptionAnalysis analysis;
    std::optional<int> declared;
    bool header_seen = false;

    constexpr std::string_view kHeader = "Key Subjects:";
    constexpr std::string_view kCountPrefix = "Subject Number:";

    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line = nl == std::string_view::npos
                                    ? text.substr(pos)
                                    : text.substr(pos, nl - pos);
        line = trim(line);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.empty()) continue;

        if (!header_seen) {
            if (line == kHeader) header_seen = true;
            continue;  // preamble before the header is ignored
        }
        if (line.starts_with(kCountPrefix)) {
            std::string_view token = trim(line.substr(kCountPrefix.size()));
            int value = 0;
            auto [ptr, ec] =
                std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
                return FormatError{FormatErrorCode::CountMismatch,
                                   "unreadable subject number"};
            }
            declared = value;
            break;  // the declared count closes the block
        }
        size_t sep = line.rfind(" - ");
        if (sep == std::string_view::npos) continue;  // not a subject line
        std::string_view entity = trim(line.substr(0, sep));
        std::string_view label_text = trim(line.substr(sep + 3));
        if (entity.empty()) continue;
        auto label = parse_av_label(label_text);
        if (!label) {
            return FormatError{FormatErrorCode::UnknownLabel, std::string(label_text)};
        }
        analysis.subjects.push_back({std::string(entity), *label});
    }

    if (!header_seen) {
        return FormatError{FormatErrorCode::NoSubjectsHeader, "missing \"Key Subjects:\""};
    }
    if (!declared) {
        return FormatError{FormatErrorCode::CountMismatch, "missing \"Subject Number:\""};
    }
    if (*declared != static_cast<int>(analysis.subjects.size())) {
        return FormatError{FormatErrorCode::CountMismatch,
                           "declared " + std::to_string(*declared) + ", found " +
                               std::to_string(analysis.subjects.size())};
    }
    analysis.subject_count = *declared;
    return analysis;
}

}  // namespace avground
