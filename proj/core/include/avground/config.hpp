#pragma once

#include <string>

#include "avground/grpo.hpp"
#include "avground/pipeline.hpp"
#include "avground/rewards.hpp"

namespace avground {

/// Every knob the CLI honors, in one file so a run is reproducible from a
/// single artifact. Flags override config values; unknown keys are errors.
struct AppConfig {
    RewardConfig rewards;       // table pointer stays null until loaded
    std::string embedding_path;
    GrpoConfig grpo;
    double grpo_learning_rate = 0.1;
    int grpo_steps = 500;
    FilterConfig filter;
    // Upstream spatial-annotation thresholds, recorded for provenance;
    // nothing in this codebase runs the annotator.
    double annotation_box_threshold = 0.4;
    double annotation_text_threshold = 0.3;

    /// Parses the TOML-style config. Recognized top-level keys:
    ///   tau, timestamp_tolerance, embedding_path, oov_fallback, stop_words
    /// sections: [weights.temporal] [weights.spatial] [weights.spatio-temporal]
    /// with keys format/temporal/object/spatial, [grpo] with epsilon/beta/
    /// group_size/advantage_epsilon/learning_rate/steps, [filter] with
    /// min_duration/max_events/min_et_ratio, [annotation] with
    /// box_threshold/text_threshold.
    static AppConfig load_file(const std::string& path);
    static AppConfig parse(const std::string& text, const std::string& origin = "<config>");
};

}  // namespace avground
