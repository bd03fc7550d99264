#include "cfn/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfn {

const char* to_string(RewardKind k) {
    switch (k) {
    case RewardKind::Ava: return "ava";
    case RewardKind::Aoi: return "aoi";
    case RewardKind::Aop: return "aop";
    case RewardKind::Qaoi: return "qaoi";
    }
    return "?";
}

RewardKind parse_reward_kind(const std::string& text) {
    if (text == "ava") return RewardKind::Ava;
    if (text == "aoi") return RewardKind::Aoi;
    if (text == "aop") return RewardKind::Aop;
    if (text == "qaoi") return RewardKind::Qaoi;
    throw std::invalid_argument("unknown reward kind '" + text + "'");
}

void EnvConfig::validate() const {
    sim.validate();
    metric.validate();
    if (episode_len < 1)
        throw std::invalid_argument("env config: episode length must be at least 1");
    if (update_cost < 0.0)
        throw std::invalid_argument("env config: update cost must be non-negative");
    if (!(age_norm > 0.0))
        throw std::invalid_argument("env config: age norm must be positive");
}

double reward_of(RewardKind kind, const RewardInputs& in, const MetricConfig& metric,
                 double update_cost, double age_norm) {
    const double cost = in.dispatched ? update_cost : 0.0;
    switch (kind) {
    case RewardKind::Ava:
        return ava(in.c, in.c_hat, static_cast<double>(in.upsilon), metric) - cost;
    case RewardKind::Aoi:
        return -static_cast<double>(in.aoi_slots) / age_norm - cost;
    case RewardKind::Aop:
        return -static_cast<double>(in.aoi_slots + in.processing_slots) / age_norm - cost;
    case RewardKind::Qaoi:
        // the query age exists only at query instants
        return (in.arrival ? -static_cast<double>(in.upsilon) / age_norm : 0.0) - cost;
    }
    return 0.0;
}

std::array<double, 5> observe_normalized(const Observation& obs, int c_max) {
    const auto squash = [](std::int64_t x) {
        return -std::expm1(-static_cast<double>(x) / 100.0);
    };
    const double cap = static_cast<double>(c_max);
    return {static_cast<double>(obs.c) / cap,
            static_cast<double>(obs.c_hat) / cap,
            squash(obs.upsilon),
            squash(obs.tau),
            squash(obs.iota)};
}

Environment::Environment(const EnvConfig& config) : config_(config), sim_(config.sim) {
    config_.validate();
}

Observation Environment::reset() { return reset(config_.sim.rng_seed); }

Observation Environment::reset(std::uint64_t seed) {
    SimConfig sim_cfg = config_.sim;
    sim_cfg.rng_seed = seed;
    sim_ = Simulator(sim_cfg);
    steps_taken_ = 0;
    done_ = false;
    return make_observation(false);
}

Observation Environment::make_observation(bool arrival_this_slot) const {
    const WorldState& w = sim_.state();
    Observation obs;
    obs.c = w.c;
    obs.c_hat = w.c_hat;
    obs.upsilon = (arrival_this_slot || config_.metric.qaoi_hold) ? w.last_qaoi : 0;
    if (w.update_in_flight) {
        obs.tau = config_.sim.delay.kind == DelayModel::Kind::Deterministic
                      ? w.update_in_flight->slots_remaining
                      : w.slot - w.update_in_flight->dispatch_slot;
    }
    obs.iota = w.slots_since_last_arrival;
    return obs;
}

StepResult Environment::step(int action) {
    if (done_)
        throw std::logic_error("environment stepped after episode end; call reset()");
    StepResult result;
    result.info = sim_.step(action ? 1 : 0);
    ++steps_taken_;
    done_ = steps_taken_ >= config_.episode_len;
    result.done = done_;

    const bool arrival = result.info.arrivals_at_ap > 0;
    result.observation = make_observation(arrival);

    const WorldState& w = sim_.state();
    RewardInputs in;
    in.c = w.c;
    in.c_hat = w.c_hat;
    in.aoi_slots = w.aoi.aoi(w.slot);
    in.upsilon = result.observation.upsilon;
    in.arrival = arrival;
    in.dispatched = result.info.update_dispatched;
    in.processing_slots = config_.sim.mean_processing_slots();
    result.reward = reward_of(config_.reward_kind, in, config_.metric,
                              config_.update_cost, config_.age_norm);
    return result;
}

} // namespace cfn
