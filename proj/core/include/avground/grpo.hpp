#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "avground/rewards.hpp"

namespace avground {

struct GrpoConfig {
    double epsilon = 0.2;             // clip radius
    double beta = 0.04;               // KL coefficient
    int group_size = 6;
    double advantage_epsilon = 1e-8;  // guard on the std denominator
};

/// One sampled response with its reward and summed token log-probabilities
/// under the new, old and reference policies.
struct GroupResponse {
    int action = 0;
    double reward = 0.0;
    double logprob_old = 0.0;
    double logprob_new = 0.0;
    double logprob_ref = 0.0;
};

struct GroupSample {
    std::vector<GroupResponse> responses;
};

/// Within-group z-scores: (r_i - mean) / (population std + guard).
/// Identical rewards yield exactly zero. Throws GroupTooSmall below 2.
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     double advantage_epsilon = 1e-8);

/// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A).
double clipped_term(double ratio, double advantage, double epsilon);

/// Nonnegative per-sample KL estimator: e^d - d - 1 with
/// d = logp_ref - logp_new. Zero iff the log-probabilities agree.
double kl_penalty(double logp_new, double logp_ref);

/// Group objective from the stored log-probabilities.
double grpo_objective(const GroupSample& group, const GrpoConfig& config);

/// Softmax policy over a finite answer alphabet, the verification vehicle
/// for the objective's gradient.
class ToyPolicy {
  public:
    explicit ToyPolicy(std::vector<double> logits, double temperature = 1.0);

    const std::vector<double>& logits() const { return logits_; }
    void set_logits(std::vector<double> logits);
    double temperature() const { return temperature_; }
    int alphabet_size() const { return static_cast<int>(logits_.size()); }

    std::vector<double> probabilities() const;
    double log_prob(int action) const;

    /// Inverse-CDF sampling on an explicitly constructed uniform, so traces
    /// are reproducible across standard libraries.
    int sample(std::mt19937_64& rng) const;

  private:
    std::vector<double> logits_;
    double temperature_ = 1.0;
};

/// Objective with logprob_new recomputed from the policy (logprob_old and
/// logprob_ref stay fixed), the function the gradient is taken of.
double grpo_objective(const GroupSample& group, const ToyPolicy& policy,
                      const GrpoConfig& config);

/// Analytic gradient of the above with respect to the policy logits.
std::vector<double> grpo_gradient(const GroupSample& group, const ToyPolicy& policy,
                                  const GrpoConfig& config);

/// Max relative coordinate error between the analytic gradient and central
/// finite differences with the given step.
double finite_diff_check(const GroupSample& group, const ToyPolicy& policy,
                         const GrpoConfig& config, double step = 1e-5);

struct TraceRow {
    int step = 0;
    double mean_reward = 0.0;
    double objective = 0.0;
    double kl = 0.0;
};

struct TrainResult {
    ToyPolicy policy;
    std::vector<TraceRow> trace;
};

/// Deterministic GRPO loop on a bandit whose arm rewards are fixed:
/// sample a group, compute advantages, take one ascent step per group
/// (the gradient is evaluated at new = old). The initial policy doubles
/// as the KL reference. Throws NonFiniteGradient if the update degenerates.
TrainResult train_toy(const std::vector<double>& arm_rewards, const ToyPolicy& initial,
                      const GrpoConfig& config, int steps, double learning_rate,
                      uint64_t seed);

/// The shipped 4-arm demo: canned answers scored against one gold record,
/// exactly one of which earns the full spatio-temporal reward of 4.
struct DemoEnv {
    std::vector<std::string> answers;
    std::vector<double> arm_rewards;
    GroundTruthRecord gold;
    RewardConfig reward_config;
};

DemoEnv make_demo_env();

}  // namespace avground
