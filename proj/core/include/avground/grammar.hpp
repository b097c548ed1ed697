#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "avground/answer.hpp"
#include "avground/format_error.hpp"

namespace avground {

// The tagged answer grammar. An answer is one <answer>...</answer> block;
// anything before or after it is ignored. Inside, in any order:
//
//   <when>[start,end]</when>          at most once, seconds, 1 decimal
//   <object> name[, name2...] </object>
//   <where>                           binds to the nearest preceding <object>
//   timestamp: [x1,y1,x2,y2]          one box per line
//   </where>
//
// Comma-separated names in one <object> become separate tracks. A single
// <where> after a multi-name <object> is shared by all of its names;
// multiple <where> blocks pair with the names positionally.

/// Parses raw model output into a StructuredAnswer, or reports the first
/// grammar violation. Total: never throws on malformed text.
Parsed<StructuredAnswer> parse_answer(std::string_view text, TaskKind task_kind);

/// True iff the text parses and the tags present are exactly the task's
/// required set: Temporal = answer+object+when, Spatial = answer+object+where,
/// SpatioTemporal = answer+object+when+where.
bool check_format(std::string_view text, TaskKind task_kind);

/// Canonical emitter, inverse of parse_answer on valid answers.
/// Throws std::invalid_argument if the answer violates its invariants.
std::string serialize_answer(const StructuredAnswer& answer);

/// Parses caption-analyzer output:
///
///   Key Subjects:
///   <entity> - <visible-only | visible & audible>
///   ...
///   Subject Number: <count>
///
/// The declared count is cross-checked against the subject lines.
Parsed<CaptionAnalysis> parse_caption_analysis(std::string_view text);

/// Maps a label string to its attribute, tolerating arbitrary spacing in
/// "visible & audible". "audible-only" is deliberately not accepted.
std::optional<AvLabel> parse_av_label(std::string_view text);

namespace detail {

struct TagPresence {
    bool when = false;
    bool where = false;
};

struct AnswerWithTags {
    StructuredAnswer answer;
    TagPresence tags;
};

Parsed<AnswerWithTags> parse_with_tags(std::string_view text, TaskKind task_kind);

}  // namespace detail

}  // namespace avground
