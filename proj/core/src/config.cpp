#include "avground/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "avground/errors.hpp"

namespace avground {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    size_t e = s.size();
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, size_t line, const std::string& what) {
    throw SchemaError(origin + ":" + std::to_string(line) + ": " + what);
}

double to_number(const std::string& origin, size_t line, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        fail(origin, line, "expected a number, got \"" + value + "\"");
    }
    return out;
}

int to_int(const std::string& origin, size_t line, const std::string& value) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        fail(origin, line, "expected an integer, got \"" + value + "\"");
    }
    return out;
}

std::string to_string_value(const std::string& origin, size_t line, const std::string& value) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        return value.substr(1, value.size() - 2);
    }
    fail(origin, line, "expected a quoted string, got " + value);
}

std::vector<std::string> to_string_list(const std::string& origin, size_t line,
                                        const std::string& value) {
    if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
        fail(origin, line, "expected a [\"...\", ...] list");
    }
    std::vector<std::string> out;
    std::string inner = value.substr(1, value.size() - 2);
    std::istringstream is(inner);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(to_string_value(origin, line, item));
    }
    return out;
}

RewardWeights* weights_for_section(AppConfig& config, const std::string& section) {
    if (section == "weights.temporal") return &config.rewards.weights_temporal;
    if (section == "weights.spatial") return &config.rewards.weights_spatial;
    if (section == "weights.spatio-temporal") return &config.rewards.weights_spatio_temporal;
    return nullptr;
}

}  // namespace

AppConfig AppConfig::parse(const std::string& text, const std::string& origin) {
    AppConfig config;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    size_t line_no = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        // strip comments outside quotes
        bool quoted = false;
        std::string line;
        for (char c : raw) {
            if (c == '"') quoted = !quoted;
            if (c == '#' && !quoted) break;
            line += c;
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "grpo" && section != "filter" && section != "annotation" &&
                weights_for_section(config, section) == nullptr) {
                fail(origin, line_no, "unknown section [" + section + "]");
            }
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(origin, line_no, "expected key = value");

        if (section.empty()) {
            if (key == "tau") {
                config.rewards.tau = to_number(origin, line_no, value);
            } else if (key == "timestamp_tolerance") {
                config.rewards.timestamp_tolerance = to_number(origin, line_no, value);
            } else if (key == "embedding_path") {
                config.embedding_path = to_string_value(origin, line_no, value);
            } else if (key == "oov_fallback") {
                std::string mode = to_string_value(origin, line_no, value);
                if (mode == "error") {
                    config.rewards.fallback = OovFallback::Error;
                } else if (mode == "jaccard") {
                    config.rewards.fallback = OovFallback::TrigramJaccard;
                } else {
                    fail(origin, line_no, "oov_fallback must be \"error\" or \"jaccard\"");
                }
            } else if (key == "stop_words") {
                config.rewards.stop_words = to_string_list(origin, line_no, value);
            } else {
                fail(origin, line_no, "unknown key \"" + key + "\"");
            }
        } else if (RewardWeights* weights = weights_for_section(config, section)) {
            double v = to_number(origin, line_no, value);
            if (v < 0) fail(origin, line_no, "weights must be non-negative");
            if (key == "format") {
                weights->format = v;
            } else if (key == "temporal") {
                weights->temporal = v;
            } else if (key == "object") {
                weights->object = v;
            } else if (key == "spatial") {
                weights->spatial = v;
            } else {
                fail(origin, line_no, "unknown key \"" + key + "\" in [" + section + "]");
            }
        } else if (section == "grpo") {
            if (key == "epsilon") {
                config.grpo.epsilon = to_number(origin, line_no, value);
                if (!(config.grpo.epsilon > 0 && config.grpo.epsilon < 1)) {
                    fail(origin, line_no, "epsilon must lie in (0,1)");
                }
            } else if (key == "beta") {
                config.grpo.beta = to_number(origin, line_no, value);
                if (config.grpo.beta < 0) fail(origin, line_no, "beta must be >= 0");
            } else if (key == "group_size") {
                config.grpo.group_size = to_int(origin, line_no, value);
                if (config.grpo.group_size < 2) fail(origin, line_no, "group_size must be >= 2");
            } else if (key == "advantage_epsilon") {
                config.grpo.advantage_epsilon = to_number(origin, line_no, value);
            } else if (key == "learning_rate") {
                config.grpo_learning_rate = to_number(origin, line_no, value);
            } else if (key == "steps") {
                config.grpo_steps = to_int(origin, line_no, value);
            } else {
                fail(origin, line_no, "unknown key \"" + key + "\" in [grpo]");
            }
        } else if (section == "filter") {
            if (key == "min_duration") {
                config.filter.min_duration = to_number(origin, line_no, value);
            } else if (key == "max_events") {
                config.filter.max_events = to_int(origin, line_no, value);
            } else if (key == "min_et_ratio") {
                config.filter.min_et_ratio = to_number(origin, line_no, value);
                if (!(config.filter.min_et_ratio > 0 && config.filter.min_et_ratio < 1)) {
                    fail(origin, line_no, "min_et_ratio must lie in (0,1)");
                }
            } else {
                fail(origin, line_no, "unknown key \"" + key + "\" in [filter]");
            }
        } else if (section == "annotation") {
            if (key == "box_threshold") {
                config.annotation_box_threshold = to_number(origin, line_no, value);
            } else if (key == "text_threshold") {
                config.annotation_text_threshold = to_number(origin, line_no, value);
            } else {
                fail(origin, line_no, "unknown key \"" + key + "\" in [annotation]");
            }
        }
    }
    return config;
}

AppConfig AppConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
}

}  // namespace avground
