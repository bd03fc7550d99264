#include "cfn/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "cfn/rl/checkpoint.hpp"
#include "cfn/rl/gae.hpp"

namespace cfn::rl {

void TrainConfig::validate() const {
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("train config: discount must be in (0, 1)");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("train config: learning rate must be positive");
    if (minibatch_size < 1)
        throw std::invalid_argument("train config: minibatch size must be at least 1");
    if (!(clip_ratio > 0.0 && clip_ratio < 1.0))
        throw std::invalid_argument("train config: clip ratio must be in (0, 1)");
    if (total_steps < 1 || episode_len < 1)
        throw std::invalid_argument("train config: step counts must be positive");
    if (epochs_per_update < 1 || rollout_episodes_per_update < 1)
        throw std::invalid_argument("train config: update cadence must be positive");
}

void RolloutBuffer::clear() {
    observations.clear();
    actions.clear();
    log_probs.clear();
    rewards.clear();
    values.clear();
    dones.clear();
    advantages.clear();
    returns.clear();
}

void RolloutBuffer::compute_advantages(double gamma, double lambda) {
    auto res = gae(rewards, values, dones, gamma, lambda, 0.0);
    advantages = std::move(res.advantages);
    returns = std::move(res.returns);
}

namespace {

void normalize(std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs)
        var += (x - mean) * (x - mean);
    const double stddev = std::max(std::sqrt(var / n), 1e-8);
    for (double& x : xs)
        x = (x - mean) / stddev;
}

} // namespace

BatchEval ppo_batch(const ActorCritic& net, std::span<const PpoSample> samples,
                    const TrainConfig& cfg, std::vector<double>* grad) {
    BatchEval eval;
    const double batch = static_cast<double>(samples.size());
    ForwardCache cache;
    for (const PpoSample& s : samples) {
        net.forward(s.obs, cache);
        const double logp_new = cache.out.log_probs[static_cast<std::size_t>(s.action)];
        const double ratio = std::exp(logp_new - s.old_log_prob);
        const double clipped = std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
        const double surr_plain = ratio * s.advantage;
        const double surr_clip = clipped * s.advantage;
        const double policy_obj = std::min(surr_plain, surr_clip);

        const auto& p = cache.out.probs;
        const auto& lp = cache.out.log_probs;
        const double entropy = -(p[0] * lp[0] + p[1] * lp[1]);
        const double verr = cache.out.value - s.value_target;

        eval.loss += (-policy_obj + cfg.value_coef * verr * verr -
                      cfg.entropy_coef * entropy) /
                     batch;
        eval.policy_loss += -policy_obj / batch;
        eval.value_loss += verr * verr / batch;
        eval.entropy += entropy / batch;
        eval.clip_fraction += (std::abs(ratio - 1.0) > cfg.clip_ratio ? 1.0 : 0.0) / batch;

        if (!grad)
            continue;
        // d(-policy_obj)/dlogits: gradient flows only through the unclipped
        // branch when it attains the minimum
        std::array<double, 2> dlogits{0.0, 0.0};
        if (surr_plain <= surr_clip) {
            const double scale = -s.advantage * ratio / batch;
            dlogits[0] = scale * ((s.action == 0 ? 1.0 : 0.0) - p[0]);
            dlogits[1] = scale * ((s.action == 1 ? 1.0 : 0.0) - p[1]);
        }
        // entropy bonus: d(-c_e * H)/dlogit_j = c_e * p_j * (log p_j + H)
        dlogits[0] += cfg.entropy_coef * p[0] * (lp[0] + entropy) / batch;
        dlogits[1] += cfg.entropy_coef * p[1] * (lp[1] + entropy) / batch;
        const double dvalue = 2.0 * cfg.value_coef * verr / batch;
        net.backward(cache, dlogits, dvalue, *grad);
    }
    return eval;
}

UpdateStats ppo_update(ActorCritic& net, Adam& optimizer, RolloutBuffer& buffer,
                       const TrainConfig& cfg, Rng& shuffle_rng) {
    const std::size_t n = buffer.size();
    if (n == 0 || buffer.advantages.size() != n)
        throw std::invalid_argument("ppo_update: buffer incomplete");

    normalize(buffer.advantages);

    const std::vector<double> saved_params = net.params();
    UpdateStats stats;
    std::size_t batches = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> grad(net.params().size(), 0.0);
    std::vector<PpoSample> minibatch;
    minibatch.reserve(static_cast<std::size_t>(cfg.minibatch_size));

    for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
        // Fisher-Yates with the trainer's own stream, for reproducibility
        for (std::size_t i = n; i > 1; --i) {
            const auto j = static_cast<std::size_t>(
                shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.minibatch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.minibatch_size));
            minibatch.clear();
            for (std::size_t pos = start; pos < end; ++pos) {
                const std::size_t i = order[pos];
                minibatch.push_back({buffer.observations[i], buffer.actions[i],
                                     buffer.log_probs[i], buffer.advantages[i],
                                     buffer.returns[i]});
            }
            std::fill(grad.begin(), grad.end(), 0.0);
            const BatchEval eval = ppo_batch(net, minibatch, cfg, &grad);

            if (!std::isfinite(eval.loss)) {
                net.params() = saved_params;
                stats.aborted = true;
                stats.diagnostic = "non-finite loss at epoch " + std::to_string(epoch);
                return stats;
            }
            optimizer.step(net.params(), grad);
            if (!net.params_finite()) {
                net.params() = saved_params;
                stats.aborted = true;
                stats.diagnostic = "non-finite parameters after optimizer step";
                return stats;
            }
            stats.policy_loss += eval.policy_loss;
            stats.value_loss += eval.value_loss;
            stats.entropy += eval.entropy;
            stats.clip_fraction += eval.clip_fraction;
            ++batches;
        }
    }

    const double denom = static_cast<double>(batches);
    stats.policy_loss /= denom;
    stats.value_loss /= denom;
    stats.entropy /= denom;
    stats.clip_fraction /= denom;
    return stats;
}

TrainResult train(RolloutEnv& env, const TrainConfig& cfg, std::uint64_t seed,
                  const std::string& checkpoint_dir, std::uint64_t config_hash) {
    cfg.validate();
    NetShape shape{5, cfg.hidden1, cfg.hidden2, 2};
    TrainResult result{ActorCritic::initialized(shape, seed), {}, false};
    ActorCritic& net = result.net;
    Adam optimizer(cfg.learning_rate, net.params().size());
    Rng action_rng(splitmix64(seed ^ 0x616374ULL));
    Rng shuffle_rng(splitmix64(seed ^ 0x73687566ULL));

    RolloutBuffer buffer;
    std::vector<double> window_returns;
    std::int64_t steps_done = 0;
    std::int64_t episode_index = 0;
    int update_index = 0;

    while (steps_done < cfg.total_steps) {
        auto obs = env.reset(splitmix64(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(episode_index + 1)));
        double episode_return = 0.0;
        for (std::int64_t i = 0; i < cfg.episode_len; ++i) {
            const ForwardOut out = net.forward(obs);
            const int action = action_rng.u01() < out.probs[0] ? 0 : 1;
            buffer.observations.push_back(obs);
            buffer.actions.push_back(action);
            buffer.log_probs.push_back(out.log_probs[static_cast<std::size_t>(action)]);
            buffer.values.push_back(out.value);

            const StepOut so = env.step(action);
            buffer.rewards.push_back(so.reward);
            buffer.dones.push_back(so.done ? 1 : 0);
            episode_return += so.reward;
            obs = so.obs;
            ++steps_done;
            if (so.done)
                break;
        }
        window_returns.push_back(episode_return);
        ++episode_index;

        const bool window_full = episode_index % cfg.rollout_episodes_per_update == 0;
        const bool finished = steps_done >= cfg.total_steps;
        if ((window_full || finished) && buffer.size() > 0) {
            buffer.compute_advantages(cfg.discount, cfg.gae_lambda);
            const UpdateStats stats = ppo_update(net, optimizer, buffer, cfg, shuffle_rng);
            ++update_index;
            const double mean_return =
                std::accumulate(window_returns.begin(), window_returns.end(), 0.0) /
                static_cast<double>(window_returns.size());
            result.curve.push_back({update_index, mean_return, stats.policy_loss,
                                    stats.value_loss, stats.entropy});
            window_returns.clear();
            buffer.clear();
            if (stats.aborted) {
                result.diverged = true;
                break;
            }
            if (!checkpoint_dir.empty() && cfg.checkpoint_every_updates > 0 &&
                update_index % cfg.checkpoint_every_updates == 0) {
                save_checkpoint(net, config_hash,
                                checkpoint_dir + "/checkpoint_update_" +
                                    std::to_string(update_index) + ".bin");
            }
        }
    }
    return result;
}

void write_learning_curve_csv(const std::vector<TrainPoint>& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write learning curve to " + path);
    out << "update_index,mean_return,policy_loss,value_loss,entropy\n";
    char line[256];
    for (const auto& p : curve) {
        std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.10g,%.10g\n", p.update_index,
                      p.mean_return, p.policy_loss, p.value_loss, p.entropy);
        out << line;
    }
}

} // namespace cfn::rl
