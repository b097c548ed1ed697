// avground: parse, score and evaluate audio-visual grounding answers,
// filter dataset manifests, generate QAs, and run the GRPO bandit demo.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "avground/config.hpp"
#include "avground/errors.hpp"
#include "avground/grammar.hpp"
#include "avground/grpo.hpp"
#include "avground/io.hpp"
#include "avground/metrics.hpp"
#include "avground/pipeline.hpp"
#include "avground/rewards.hpp"

#include <nlohmann/json.hpp>

namespace {

using namespace avground;
using nlohmann::ordered_json;

struct CommonOptions {
    std::string config_path;
    std::string embedding_path;
    std::optional<double> tau;
    std::optional<std::string> oov_fallback;
    int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_jobs) {
    cmd->add_option("--config", opts.config_path, "TOML-style config file");
    cmd->add_option("--embeddings", opts.embedding_path,
                    "word2vec text embeddings (overrides config)");
    cmd->add_option("--tau", opts.tau, "object similarity threshold");
    cmd->add_option("--oov-fallback", opts.oov_fallback,
                    "out-of-vocabulary policy: error | jaccard");
    if (with_jobs) {
        cmd->add_option("--jobs", opts.jobs, "parallel scoring threads")
            ->check(CLI::PositiveNumber);
    }
}

// Loaded config plus the embedding table it points at.
struct Runtime {
    AppConfig config;
    EmbeddingTable table;
};

Runtime make_runtime(const CommonOptions& opts, OovFallback default_fallback) {
    Runtime rt;
    if (!opts.config_path.empty()) {
        rt.config = AppConfig::load_file(opts.config_path);
    } else {
        rt.config.rewards.fallback = default_fallback;
    }
    if (opts.tau) rt.config.rewards.tau = *opts.tau;
    if (opts.oov_fallback) {
        if (*opts.oov_fallback == "error") {
            rt.config.rewards.fallback = OovFallback::Error;
        } else if (*opts.oov_fallback == "jaccard") {
            rt.config.rewards.fallback = OovFallback::TrigramJaccard;
        } else {
            throw SchemaError("--oov-fallback must be \"error\" or \"jaccard\"");
        }
    }
    std::string embeddings =
        !opts.embedding_path.empty() ? opts.embedding_path : rt.config.embedding_path;
    if (!embeddings.empty()) {
        rt.table = EmbeddingTable::load_file(embeddings);
        rt.config.rewards.table = &rt.table;
    }
    return rt;
}

std::string read_input(const std::string& path) {
    if (path == "-" || path.empty()) {
        std::stringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write file: " + path);
    return out;
}

template <typename Fn>
void parallel_for(size_t n, int jobs, Fn&& fn) {
    size_t threads = std::min<size_t>(std::max(jobs, 1), n);
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    size_t chunk = (n + threads - 1) / threads;
    for (size_t t = 0; t < threads; ++t) {
        size_t begin = t * chunk;
        size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

ordered_json answer_to_json(const StructuredAnswer& answer) {
    ordered_json j;
    j["task"] = to_string(answer.task_kind);
    if (answer.interval) {
        j["interval"] = {answer.interval->start, answer.interval->end};
    } else {
        j["interval"] = nullptr;
    }
    ordered_json tracks = ordered_json::array();
    for (const ObjectTrack& track : answer.tracks) {
        ordered_json boxes = ordered_json::object();
        for (const TimedBox& tb : track.boxes) {
            boxes[format_seconds(tb.timestamp)] = {tb.box.x1, tb.box.y1, tb.box.x2,
                                                   tb.box.y2};
        }
        tracks.push_back({{"name", track.name}, {"boxes", std::move(boxes)}});
    }
    j["tracks"] = std::move(tracks);
    return j;
}

int run_parse(const std::string& task_name, const std::string& input_path, bool caption) {
    std::string text = read_input(input_path);
    ordered_json out;
    if (caption) {
        auto parsed = parse_caption_analysis(text);
        if (parsed.ok()) {
            out["ok"] = true;
            ordered_json subjects = ordered_json::array();
            for (const CaptionSubject& s : parsed.value().subjects) {
                subjects.push_back({{"name", s.name}, {"label", to_string(s.label)}});
            }
            out["subjects"] = std::move(subjects);
            out["subject_count"] = parsed.value().subject_count;
        } else {
            out["ok"] = false;
            out["error"] = {{"code", to_string(parsed.error().code)},
                            {"detail", parsed.error().detail}};
        }
    } else {
        auto kind = task_kind_from_string(task_name);
        if (!kind) throw SchemaError("unknown task \"" + task_name + "\"");
        auto parsed = parse_answer(text, *kind);
        out["format_ok"] = check_format(text, *kind);
        if (parsed.ok()) {
            out["ok"] = true;
            out["answer"] = answer_to_json(parsed.value());
        } else {
            out["ok"] = false;
            out["error"] = {{"code", to_string(parsed.error().code)},
                            {"detail", parsed.error().detail}};
        }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_score(const CommonOptions& common, const std::string& pred_path,
              const std::string& gt_path, const std::string& task_filter,
              const std::string& out_path) {
    Runtime rt = make_runtime(common, OovFallback::Error);
    std::vector<GroundTruthRecord> gts = load_ground_truth_jsonl(gt_path);
    std::vector<Prediction> preds = load_predictions_jsonl(pred_path);

    if (!task_filter.empty()) {
        auto kind = task_kind_from_string(task_filter);
        if (!kind) throw SchemaError("unknown task \"" + task_filter + "\"");
        std::erase_if(gts, [&](const GroundTruthRecord& gt) { return gt.task_kind != *kind; });
    }

    std::map<std::string, const std::string*> text_by_id;
    for (const Prediction& pred : preds) {
        if (!text_by_id.emplace(pred.qa_id, &pred.text).second) {
            throw DuplicateQaId(pred.qa_id);
        }
    }
    std::sort(gts.begin(), gts.end(),
              [](const GroundTruthRecord& a, const GroundTruthRecord& b) {
                  return a.qa_id < b.qa_id;
              });
    {
        std::set<std::string> known;
        for (const GroundTruthRecord& gt : gts) {
            if (!known.insert(gt.qa_id).second) throw DuplicateQaId(gt.qa_id);
        }
        if (task_filter.empty()) {
            for (const Prediction& pred : preds) {
                if (!known.contains(pred.qa_id)) throw UnknownQaId(pred.qa_id);
            }
        }
    }

    std::vector<RewardBreakdown> breakdowns(gts.size());
    std::exception_ptr failure;
    std::mutex failure_mutex;
    parallel_for(gts.size(), common.jobs, [&](size_t i) {
        try {
            auto it = text_by_id.find(gts[i].qa_id);
            if (it != text_by_id.end()) {
                breakdowns[i] = score_sample(*it->second, gts[i], rt.config.rewards);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file = open_output(out_path);
        out = &file;
    }
    RewardBreakdown mean;
    for (size_t i = 0; i < gts.size(); ++i) {
        *out << breakdown_jsonl_line(gts[i].qa_id, breakdowns[i]) << "\n";
        mean.format += breakdowns[i].format;
        mean.object += breakdowns[i].object;
        mean.temporal += breakdowns[i].temporal;
        mean.spatial += breakdowns[i].spatial;
        mean.total += breakdowns[i].total;
    }
    double n = gts.empty() ? 1.0 : static_cast<double>(gts.size());
    std::ostream& summary = out_path.empty() ? std::cerr : std::cout;
    summary << "samples " << gts.size() << "  mean_total " << mean.total / n
            << "  mean_format " << mean.format / n << "  mean_object " << mean.object / n
            << "  mean_temporal " << mean.temporal / n << "  mean_spatial "
            << mean.spatial / n << "\n";
    return 0;
}

int run_evaluate(const CommonOptions& common, const std::string& pred_path,
                 const std::string& gt_path, bool as_json, const std::string& out_path) {
    Runtime rt = make_runtime(common, OovFallback::TrigramJaccard);
    std::vector<GroundTruthRecord> gts = load_ground_truth_jsonl(gt_path);
    std::vector<Prediction> preds = load_predictions_jsonl(pred_path);
    std::vector<SampleScore> scores = score_dataset(gts, preds, rt.config.rewards, common.jobs);
    MetricsReport report = aggregate(scores);

    std::string rendered = as_json ? report_to_json(report) : render_table(report);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        open_output(out_path) << rendered;
    }
    return 0;
}

int run_filter(const std::string& manifest_path, const std::string& config_path,
               const std::string& out_path, const std::string& rejects_path) {
    FilterConfig filter;
    if (!config_path.empty()) filter = AppConfig::load_file(config_path).filter;
    std::vector<VideoRecord> records = load_manifest_json(manifest_path);
    FilterResult result = filter_manifest(records, filter);

    if (!out_path.empty()) {
        auto out = open_output(out_path);
        write_manifest_json(out, result.kept);
    } else {
        write_manifest_json(std::cout, result.kept);
    }
    if (!rejects_path.empty()) {
        auto out = open_output(rejects_path);
        write_rejects_json(out, result.rejected);
    }
    std::cerr << "kept " << result.kept.size() << "/" << records.size() << " videos, rejected "
              << result.rejected.size() << "\n";
    return 0;
}

int run_generate_qa(const std::string& manifest_path, const std::string& boxes_path,
                    const std::string& out_path) {
    std::vector<VideoRecord> records = load_manifest_json(manifest_path);
    BoxSidecar sidecar;
    if (!boxes_path.empty()) sidecar = load_box_sidecar_json(boxes_path);

    std::vector<QaRecord> qas;
    for (const VideoRecord& record : records) {
        std::vector<QaRecord> generated =
            generate_qas(record, boxes_path.empty() ? nullptr : &sidecar);
        if (generated.empty()) {
            std::cerr << "warning: video \"" << record.video_id
                      << "\" has no eligible objects, no QAs generated\n";
        }
        for (QaRecord& qa : generated) qas.push_back(std::move(qa));
    }
    if (!out_path.empty()) {
        auto out = open_output(out_path);
        write_qa_jsonl(out, qas);
    } else {
        write_qa_jsonl(std::cout, qas);
    }
    std::cerr << "generated " << qas.size() << " QAs from " << records.size() << " videos\n";
    return 0;
}

int run_split_report(const std::string& qas_path, const std::string& declared_path) {
    std::vector<QaRecord> qas = load_qa_jsonl(qas_path);
    DeclaredCounts declared = load_declared_counts_json(declared_path);
    SplitReport report = split_report(qas, declared);
    std::cout << split_report_to_json(report);
    return 0;
}

int run_qc(const std::string& ratings_path, double cutoff) {
    std::vector<RatingPair> ratings = load_ratings_csv(ratings_path);
    QcReport report = qc_aggregate(ratings, cutoff);
    if (report.kappa_degenerate) {
        std::cerr << "warning: a rater shows no variance, kappa reported as 0\n";
    }
    std::cout << qc_report_to_json(report);
    return 0;
}

int run_grpo_demo(const AppConfig& base, std::optional<int> steps,
                  std::optional<int> group_size, std::optional<double> epsilon,
                  std::optional<double> beta, std::optional<double> lr, uint64_t seed,
                  const std::string& trace_path) {
    GrpoConfig config = base.grpo;
    if (group_size) config.group_size = *group_size;
    if (epsilon) config.epsilon = *epsilon;
    if (beta) config.beta = *beta;
    int n_steps = steps.value_or(base.grpo_steps);
    double learning_rate = lr.value_or(base.grpo_learning_rate);

    DemoEnv env = make_demo_env();
    ToyPolicy initial(std::vector<double>(env.answers.size(), 0.0));
    TrainResult result = train_toy(env.arm_rewards, initial, config, n_steps,
                                   learning_rate, seed);

    if (!trace_path.empty()) {
        auto out = open_output(trace_path);
        for (const TraceRow& row : result.trace) {
            ordered_json j;
            j["step"] = row.step;
            j["mean_reward"] = row.mean_reward;
            j["objective"] = row.objective;
            j["kl"] = row.kl;
            out << j.dump() << "\n";
        }
    }

    std::vector<double> probs = result.policy.probabilities();
    size_t best = 0;
    for (size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    ordered_json summary;
    summary["steps"] = n_steps;
    summary["group_size"] = config.group_size;
    summary["seed"] = seed;
    summary["arm_rewards"] = env.arm_rewards;
    summary["final_probabilities"] = probs;
    summary["argmax_arm"] = best;
    summary["initial_mean_reward"] = result.trace.empty() ? 0.0 : result.trace.front().mean_reward;
    summary["final_mean_reward"] = result.trace.empty() ? 0.0 : result.trace.back().mean_reward;
    std::cout << summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"audio-visual spatio-temporal grounding toolkit"};
    app.require_subcommand(1);

    // parse
    auto* parse_cmd = app.add_subcommand("parse", "parse one model answer (or caption analysis)");
    std::string parse_task = "spatio-temporal";
    std::string parse_input = "-";
    bool parse_caption = false;
    parse_cmd->add_option("--task", parse_task, "temporal | spatial | spatio-temporal");
    parse_cmd->add_option("--input", parse_input, "input file, or - for stdin");
    parse_cmd->add_flag("--caption", parse_caption, "parse caption-analyzer output instead");

    // score
    auto* score_cmd = app.add_subcommand("score", "per-sample reward breakdowns");
    CommonOptions score_common;
    std::string score_pred, score_gt, score_task, score_out;
    score_cmd->add_option("--pred", score_pred, "predictions JSONL {qa_id, text}")->required();
    score_cmd->add_option("--gt", score_gt, "ground-truth JSONL")->required();
    score_cmd->add_option("--task", score_task, "restrict to one task kind");
    score_cmd->add_option("--out", score_out, "write breakdown JSONL here (default stdout)");
    add_common(score_cmd, score_common, true);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "dataset metrics report");
    CommonOptions eval_common;
    std::string eval_pred, eval_gt, eval_out;
    bool eval_json = false;
    eval_cmd->add_option("--pred", eval_pred, "predictions JSONL {qa_id, text}")->required();
    eval_cmd->add_option("--gt", eval_gt, "ground-truth JSONL")->required();
    eval_cmd->add_flag("--json", eval_json, "emit machine-readable JSON");
    eval_cmd->add_option("--out", eval_out, "write the report here (default stdout)");
    add_common(eval_cmd, eval_common, true);

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "apply the manifest gates");
    std::string filter_manifest_path, filter_config, filter_out, filter_rejects;
    filter_cmd->add_option("--manifest", filter_manifest_path, "manifest JSON")->required();
    filter_cmd->add_option("--config", filter_config, "TOML-style config file");
    filter_cmd->add_option("--out", filter_out, "kept manifest JSON (default stdout)");
    filter_cmd->add_option("--rejects", filter_rejects, "rejected videos JSON");

    // generate-qa
    auto* qa_cmd = app.add_subcommand("generate-qa", "expand events into task questions");
    std::string qa_manifest, qa_boxes, qa_out;
    qa_cmd->add_option("--manifest", qa_manifest, "filtered manifest JSON")->required();
    qa_cmd->add_option("--boxes", qa_boxes, "bounding-box sidecar JSON");
    qa_cmd->add_option("--out", qa_out, "QA JSONL (default stdout)");

    // split-report
    auto* split_cmd = app.add_subcommand("split-report", "tally QAs against declared counts");
    std::string split_qas, split_declared;
    split_cmd->add_option("--qas", split_qas, "QA JSONL")->required();
    split_cmd->add_option("--declared", split_declared, "declared counts JSON")->required();

    // qc
    auto* qc_cmd = app.add_subcommand("qc", "aggregate dual-rater quality scores");
    std::string qc_ratings;
    double qc_cutoff = 2.5;
    qc_cmd->add_option("--ratings", qc_ratings, "CSV video_id,rater_a,rater_b")->required();
    qc_cmd->add_option("--cutoff", qc_cutoff, "keep videos with rater mean >= cutoff");

    // grpo-demo
    auto* demo_cmd = app.add_subcommand("grpo-demo", "bandit demo of the group objective");
    std::string demo_config, demo_trace;
    std::optional<int> demo_steps, demo_group;
    std::optional<double> demo_epsilon, demo_beta, demo_lr;
    uint64_t demo_seed = 0;
    demo_cmd->add_option("--config", demo_config, "TOML-style config file");
    demo_cmd->add_option("--steps", demo_steps, "optimization steps");
    demo_cmd->add_option("--group-size", demo_group, "responses per group");
    demo_cmd->add_option("--epsilon", demo_epsilon, "clip radius");
    demo_cmd->add_option("--beta", demo_beta, "KL coefficient");
    demo_cmd->add_option("--lr", demo_lr, "learning rate");
    demo_cmd->add_option("--seed", demo_seed, "RNG seed");
    demo_cmd->add_option("--trace-out", demo_trace, "JSONL trace of {step, mean_reward, objective, kl}");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (parse_cmd->parsed()) return run_parse(parse_task, parse_input, parse_caption);
        if (score_cmd->parsed()) {
            return run_score(score_common, score_pred, score_gt, score_task, score_out);
        }
        if (eval_cmd->parsed()) {
            return run_evaluate(eval_common, eval_pred, eval_gt, eval_json, eval_out);
        }
        if (filter_cmd->parsed()) {
            return run_filter(filter_manifest_path, filter_config, filter_out, filter_rejects);
        }
        if (qa_cmd->parsed()) return run_generate_qa(qa_manifest, qa_boxes, qa_out);
        if (split_cmd->parsed()) return run_split_report(split_qas, split_declared);
        if (qc_cmd->parsed()) return run_qc(qc_ratings, qc_cutoff);
        if (demo_cmd->parsed()) {
            AppConfig base;
            if (!demo_config.empty()) base = AppConfig::load_file(demo_config);
            return run_grpo_demo(base, demo_steps, demo_group, demo_epsilon, demo_beta,
                                 demo_lr, demo_seed, demo_trace);
        }
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
