#include "cfn/policies.hpp"

#include <stdexcept>

namespace cfn {

Policy Policy::always() { return Policy(Kind::Always); }

Policy Policy::never() { return Policy(Kind::Never); }

Policy Policy::periodic(std::int64_t period_slots) {
    if (period_slots < 1)
        throw std::invalid_argument("periodic policy: period must be at least 1");
    Policy p(Kind::Periodic);
    p.period_ = period_slots;
    return p;
}

Policy Policy::greedy_threshold(double threshold, MetricConfig metric) {
    if (threshold < -1.0 || threshold > 1.0)
        throw std::invalid_argument("greedy policy: threshold must lie in [-1, 1]");
    metric.validate();
    Policy p(Kind::GreedyThreshold);
    p.threshold_ = threshold;
    p.metric_ = metric;
    return p;
}

Policy Policy::learned(rl::ActorCritic net, int c_max) {
    if (net.shape().obs_dim != 5)
        throw std::invalid_argument("learned policy: checkpoint input width " +
                                    std::to_string(net.shape().obs_dim) +
                                    " does not match the 5-component observation");
    if (net.shape().act_dim != 2)
        throw std::invalid_argument("learned policy: checkpoint must have two actions");
    if (c_max < 1)
        throw std::invalid_argument("learned policy: c_max must be at least 1");
    Policy p(Kind::Learned);
    p.net_ = std::move(net);
    p.c_max_ = c_max;
    return p;
}

Policy Policy::learned_stochastic(rl::ActorCritic net, int c_max, std::uint64_t seed) {
    Policy p = learned(std::move(net), c_max);
    p.kind_ = Kind::LearnedStochastic;
    p.sampler_.emplace(splitmix64(seed ^ 0x706f6c696379ULL));
    return p;
}

int Policy::act(const Observation& obs) {
    const std::int64_t slot = slot_++;
    switch (kind_) {
    case Kind::Always:
        return 1;
    case Kind::Never:
        return 0;
    case Kind::Periodic:
        return slot % period_ == 0 ? 1 : 0;
    case Kind::GreedyThreshold:
        return ava(obs.c, obs.c_hat, static_cast<double>(obs.upsilon), metric_) < threshold_
                   ? 1
                   : 0;
    case Kind::Learned: {
        const auto vec = observe_normalized(obs, c_max_);
        const auto out = net_->forward(vec);
        // greedy evaluation; ties resolve to "no update"
        return out.probs[1] > out.probs[0] ? 1 : 0;
    }
    }
    return 0;
}

std::string Policy::label() const {
    switch (kind_) {
    case Kind::Always: return "always";
    case Kind::Never: return "never";
    case Kind::Periodic: return "periodic:" + std::to_string(period_);
    case Kind::GreedyThreshold: return "greedy:" + std::to_string(threshold_);
    case Kind::Learned: return "learned";
    }
    return "?";
}

} // namespace cfn
