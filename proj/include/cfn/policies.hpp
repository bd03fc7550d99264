#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cfn/env.hpp"
#include "cfn/metrics.hpp"
#include "cfn/rl/net.hpp"
#include "cfn/rng.hpp"

namespace cfn {

// Uniform wrapper over learned and heuristic update strategies. act() is pure
// in (policy state, observation); the only mutable state is the slot counter
// used by the periodic heuristic and the sampler stream of the stochastic
// learned mode.
class Policy {
public:
    enum class Kind { Learned, LearnedStochastic, Always, Never, Periodic, GreedyThreshold };

    static Policy always();
    static Policy never();
    static Policy periodic(std::int64_t period_slots);
    static Policy greedy_threshold(double threshold, MetricConfig metric);
    // Greedy argmax of the actor head. Rejects networks whose input width
    // differs from the observation width.
    static Policy learned(rl::ActorCritic net, int c_max);
    // Samples actions from the learned distribution with a seeded stream, the
    // way the policy acted during training. Deterministic per seed.
    static Policy learned_stochastic(rl::ActorCritic net, int c_max, std::uint64_t seed);

    int act(const Observation& obs);

    Kind kind() const { return kind_; }
    std::string label() const;

private:
    explicit Policy(Kind kind) : kind_(kind) {}

    Kind kind_;
    std::int64_t period_ = 1;
    double threshold_ = 0.0;
    MetricConfig metric_;
    std::optional<rl::ActorCritic> net_;
    int c_max_ = 0;
    std::int64_t slot_ = 0;
    std::optional<Rng> sampler_;
};

} // namespace cfn
