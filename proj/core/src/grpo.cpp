#include "avground/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avground/errors.hpp"
#include "avground/grammar.hpp"

namespace avground {

std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double advantage_epsilon) {
    if (rewards.size() < 2) {
        throw GroupTooSmall("group_advantages: need at least 2 rewards, got " +
                            std::to_string(rewards.size()));
    }
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    double variance = 0.0;
    for (double r : rewards) variance += (r - mean) * (r - mean);
    variance /= static_cast<double>(rewards.size());
    double denom = std::sqrt(variance) + advantage_epsilon;
    std::vector<double> advantages(rewards.size());
    for (size_t i = 0; i < rewards.size(); ++i) {
        advantages[i] = denom == 0.0 ? 0.0 : (rewards[i] - mean) / denom;
    }
    return advantages;
}

double clipped_term(double ratio, double advantage, double epsilon) {
    double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(ratio * advantage, clipped * advantage);
}

double kl_penalty(double logp_new, double logp_ref) {
    double d = logp_ref - logp_new;
    // expm1 keeps the estimator exact near zero; e^d - d - 1 >= 0 always.
    return std::expm1(d) - d;
}

namespace {

std::vector<double> rewards_of(const GroupSample& group) {
    std::vector<double> rewards;
    rewards.reserve(group.responses.size());
    for (const GroupResponse& r : group.responses) rewards.push_back(r.reward);
    return rewards;
}

double objective_impl(const GroupSample& group, const GrpoConfig& config,
                      const ToyPolicy* policy) {
    const auto& responses = group.responses;
    std::vector<double> advantages = group_advantages(rewards_of(group),
                                                      config.advantage_epsilon);
    double sum = 0.0;
    for (size_t i = 0; i < responses.size(); ++i) {
        double logp_new = policy != nullptr ? policy->log_prob(responses[i].action)
                                            : responses[i].logprob_new;
        double ratio = std::exp(logp_new - responses[i].logprob_old);
        sum += clipped_term(ratio, advantages[i], config.epsilon);
        sum -= config.beta * kl_penalty(logp_new, responses[i].logprob_ref);
    }
    return sum / static_cast<double>(responses.size());
}

}  // namespace

double grpo_objective(const GroupSample& group, const GrpoConfig& config) {
    return objective_impl(group, config, nullptr);
}

double grpo_objective(const GroupSample& group, const ToyPolicy& policy,
                      const GrpoConfig& config) {
    return objective_impl(group, config, &policy);
}

ToyPolicy::ToyPolicy(std::vector<double> logits, double temperature)
    : logits_(std::move(logits)), temperature_(temperature) {
    if (logits_.empty()) throw std::invalid_argument("ToyPolicy: empty logit vector");
    if (!(temperature_ > 0.0)) throw std::invalid_argument("ToyPolicy: temperature must be positive");
}

void ToyPolicy::set_logits(std::vector<double> logits) {
    if (logits.size() != logits_.size()) {
        throw std::invalid_argument("ToyPolicy: alphabet size is fixed");
    }
    logits_ = std::move(logits);
}

std::vector<double> ToyPolicy::probabilities() const {
    double max_scaled = logits_[0] / temperature_;
    for (double z : logits_) max_scaled = std::max(max_scaled, z / temperature_);
    std::vector<double> probs(logits_.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits_.size(); ++i) {
        probs[i] = std::exp(logits_[i] / temperature_ - max_scaled);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

double ToyPolicy::log_prob(int action) const {
    if (action < 0 || action >= alphabet_size()) {
        throw std::out_of_range("ToyPolicy::log_prob: action out of range");
    }
    double max_scaled = logits_[0] / temperature_;
    for (double z : logits_) max_scaled = std::max(max_scaled, z / temperature_);
    double sum = 0.0;
    for (double z : logits_) sum += std::exp(z / temperature_ - max_scaled);
    return logits_[static_cast<size_t>(action)] / temperature_ - max_scaled - std::log(sum);
}

int ToyPolicy::sample(std::mt19937_64& rng) const {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // uniform in [0,1)
    std::vector<double> probs = probabilities();
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

std::vector<double> grpo_gradient(const GroupSample& group, const ToyPolicy& policy,
                                  const GrpoConfig& config) {
    const auto& responses = group.responses;
    std::vector<double> advantages = group_advantages(rewards_of(group),
                                                      config.advantage_epsilon);
    std::vector<double> probs = policy.probabilities();
    std::vector<double> grad(probs.size(), 0.0);
    double temperature = policy.temperature();

    for (size_t i = 0; i < responses.size(); ++i) {
        int action = responses[i].action;
        double logp_new = policy.log_prob(action);
        double ratio = std::exp(logp_new - responses[i].logprob_old);
        double unclipped = ratio * advantages[i];
        double clipped = std::clamp(ratio, 1.0 - config.epsilon, 1.0 + config.epsilon) *
                         advantages[i];
        // The clipped branch is flat in theta whenever it is the minimum
        // with the ratio outside the band; inside the band both branches
        // carry the same derivative.
        double coeff = unclipped <= clipped ? ratio * advantages[i] : 0.0;
        double d = responses[i].logprob_ref - logp_new;
        coeff += config.beta * std::expm1(d);
        for (size_t k = 0; k < grad.size(); ++k) {
            double indicator = static_cast<int>(k) == action ? 1.0 : 0.0;
            grad[k] += coeff * (indicator - probs[k]) / temperature;
        }
    }
    for (double& g : grad) g /= static_cast<double>(responses.size());
    return grad;
}

double finite_diff_check(const GroupSample& group, const ToyPolicy& policy,
                         const GrpoConfig& config, double step) {
    std::vector<double> analytic = grpo_gradient(group, policy, config);
    std::vector<double> logits = policy.logits();
    double worst = 0.0;
    for (size_t k = 0; k < logits.size(); ++k) {
        std::vector<double> bumped = logits;
        bumped[k] = logits[k] + step;
        double plus = grpo_objective(group, ToyPolicy(bumped, policy.temperature()), config);
        bumped[k] = logits[k] - step;
        double minus = grpo_objective(group, ToyPolicy(bumped, policy.temperature()), config);
        double numeric = (plus - minus) / (2.0 * step);
        double scale = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic[k] - numeric) / scale);
    }
    return worst;
}

TrainResult train_toy(const std::vector<double>& arm_rewards, const ToyPolicy& initial,
                      const GrpoConfig& config, int steps, double learning_rate,
                      uint64_t seed) {
    if (arm_rewards.size() != static_cast<size_t>(initial.alphabet_size())) {
        throw std::invalid_argument("train_toy: one reward per arm required");
    }
    if (config.group_size < 2) {
        throw GroupTooSmall("train_toy: group size must be at least 2");
    }
    ToyPolicy policy = initial;
    const ToyPolicy reference = initial;
    std::mt19937_64 rng(seed);
    TrainResult result{policy, {}};
    result.trace.reserve(static_cast<size_t>(std::max(steps, 0)));

    for (int step = 1; step <= steps; ++step) {
        GroupSample group;
        group.responses.reserve(static_cast<size_t>(config.group_size));
        double reward_sum = 0.0;
        double kl_sum = 0.0;
        for (int g = 0; g < config.group_size; ++g) {
            int action = policy.sample(rng);
            GroupResponse response;
            response.action = action;
            response.reward = arm_rewards[static_cast<size_t>(action)];
            response.logprob_new = policy.log_prob(action);
            response.logprob_old = response.logprob_new;  // single epoch per group
            response.logprob_ref = reference.log_prob(action);
            reward_sum += response.reward;
            kl_sum += kl_penalty(response.logprob_new, response.logprob_ref);
            group.responses.push_back(response);
        }

        std::vector<double> gradient = grpo_gradient(group, policy, config);
        std::vector<double> logits = policy.logits();
        for (size_t k = 0; k < logits.size(); ++k) {
            if (!std::isfinite(gradient[k])) {
                throw NonFiniteGradient("train_toy: non-finite gradient at step " +
                                        std::to_string(step));
            }
            logits[k] += learning_rate * gradient[k];
        }
        policy.set_logits(std::move(logits));

        TraceRow row;
        row.step = step;
        row.mean_reward = reward_sum / static_cast<double>(config.group_size);
        row.objective = grpo_objective(group, config);
        row.kl = kl_sum / static_cast<double>(config.group_size);
        result.trace.push_back(row);
    }
    result.policy = policy;
    return result;
}

DemoEnv make_demo_env() {
    DemoEnv env;
    env.gold.qa_id = "demo:0:st:0";
    env.gold.task_kind = TaskKind::SpatioTemporal;
    env.gold.question =
        "When is the moment dog make sound and are visible, and where are they?";
    env.gold.objects = {{"dog", AvLabel::VisibleAudible}};
    env.gold.interval = TimeInterval(10.0, 20.5);
    env.gold.tracks["dog"] = {
        {10.0, {100, 200, 300, 400}},
        {11.0, {109, 280, 320, 432}},
        {12.0, {100, 200, 300, 400}},
    };

    env.reward_config.fallback = OovFallback::TrigramJaccard;
    env.reward_config.table = nullptr;

    StructuredAnswer ideal;
    ideal.task_kind = TaskKind::SpatioTemporal;
    ideal.interval = env.gold.interval;
    ideal.tracks.push_back({"dog", env.gold.tracks["dog"]});

    env.answers = {
        serialize_answer(ideal),
        // right format, wrong everything else
        "<answer>\n<when>[30.0,40.0]</when>\n<object> cat </object>\n"
        "<where>\n30.0: [0,0,5,5]\n</where>\n</answer>",
        // unterminated tags
        "<answer><object> dog",
        // missing <where> on a spatio-temporal question
        "<answer>\n<when>[10.0,20.5]</when>\n<object> dog </object>\n</answer>",
    };
    for (const std::string& text : env.answers) {
        env.arm_rewards.push_back(score_sample(text, env.gold, env.reward_config).total);
    }
    return env;
}

}  // namespace avground
