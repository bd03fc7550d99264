#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cfn/rl/net.hpp"
#include "cfn/rng.hpp"

namespace cfn::rl {

struct TrainConfig {
    double discount = 0.995;
    double learning_rate = 3e-4;
    std::int64_t total_steps = 500000;
    std::int64_t episode_len = 2000;
    std::int64_t minibatch_size = 4000;
    double clip_ratio = 0.2;
    double gae_lambda = 0.95;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    int epochs_per_update = 10;
    int rollout_episodes_per_update = 4;
    int hidden1 = 64;
    int hidden2 = 64;
    std::int64_t checkpoint_every_updates = 0; // 0: no intermediate checkpoints

    void validate() const;
};

struct RolloutBuffer {
    std::vector<std::array<double, 5>> observations;
    std::vector<int> actions;
    std::vector<double> log_probs;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<std::uint8_t> dones;
    std::vector<double> advantages;
    std::vector<double> returns;

    std::size_t size() const { return rewards.size(); }
    void clear();
    void compute_advantages(double gamma, double lambda);
};

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    bool aborted = false;      // non-finite loss; parameters were restored
    std::string diagnostic;
};

// One training sample as seen by the loss.
struct PpoSample {
    std::array<double, 5> obs{};
    int action = 0;
    double old_log_prob = 0.0;
    double advantage = 0.0;
    double value_target = 0.0;
};

struct BatchEval {
    double loss = 0.0;        // mean minimized loss over the batch
    double policy_loss = 0.0; // mean of -min(ratio * A, clip(ratio) * A)
    double value_loss = 0.0;  // mean squared value error
    double entropy = 0.0;     // mean policy entropy
    double clip_fraction = 0.0;
};

// Evaluates the clipped PPO loss over a batch; when grad is non-null the
// analytic gradient of the mean loss is accumulated into it. This is the
// exact quantity the optimizer steps on, which makes it the target of the
// finite-difference gradient check.
BatchEval ppo_batch(const ActorCritic& net, std::span<const PpoSample> samples,
                    const TrainConfig& cfg, std::vector<double>* grad);

// One PPO update: clipped surrogate + value MSE + entropy bonus, minibatched
// gradient ascent over epochs_per_update passes. Advantages are normalized to
// zero mean / unit variance across the whole buffer first.
UpdateStats ppo_update(ActorCritic& net, Adam& optimizer, RolloutBuffer& buffer,
                       const TrainConfig& cfg, Rng& shuffle_rng);

// Minimal environment surface the trainer needs. Episode termination is
// signalled through StepOut::done.
struct StepOut {
    std::array<double, 5> obs{};
    double reward = 0.0;
    bool done = false;
};

class RolloutEnv {
public:
    virtual ~RolloutEnv() = default;
    virtual std::array<double, 5> reset(std::uint64_t seed) = 0;
    virtual StepOut step(int action) = 0;
};

struct TrainPoint {
    int update_index = 0;
    double mean_return = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
};

struct TrainResult {
    ActorCritic net;
    std::vector<TrainPoint> curve;
    bool diverged = false;
};

// Rollout/update loop: whole episodes are collected, parameters update every
// rollout_episodes_per_update episodes (plus once more for a trailing partial
// window). Fully deterministic for a fixed seed.
TrainResult train(RolloutEnv& env, const TrainConfig& cfg, std::uint64_t seed,
                  const std::string& checkpoint_dir = "", std::uint64_t config_hash = 0);

void write_learning_curve_csv(const std::vector<TrainPoint>& curve, const std::string& path);

} // namespace cfn::rl
