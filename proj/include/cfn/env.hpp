#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "cfn/metrics.hpp"
#include "cfn/simulator.hpp"

namespace cfn {

enum class RewardKind { Ava, Aoi, Aop, Qaoi };

const char* to_string(RewardKind k);
RewardKind parse_reward_kind(const std::string& text);

// Agent-visible state components.
struct Observation {
    int c = 0;
    int c_hat = 0;
    std::int64_t upsilon = 0; // sampled query age (zero between queries unless held)
    std::int64_t tau = 0;     // in-flight indicator, see Environment notes
    std::int64_t iota = 0;    // slots since the last client arrival
};

struct EnvConfig {
    SimConfig sim;
    MetricConfig metric;
    RewardKind reward_kind = RewardKind::Ava;
    double update_cost = 0.5;       // charged per dispatched update
    std::int64_t episode_len = 2000;
    double age_norm = 100.0;        // scale for age-based baseline rewards

    void validate() const;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    SlotReport info;
};

// Inputs to the per-slot reward, all taken after the slot has been applied.
struct RewardInputs {
    int c = 0;
    int c_hat = 0;
    std::int64_t aoi_slots = 0;     // current age at the AP
    std::int64_t upsilon = 0;       // query-age state component
    bool arrival = false;           // a request arrived during the slot
    bool dispatched = false;        // an update was actually sent
    std::int64_t processing_slots = 0; // mean processing duration, for Aop
};

// Reward per kind. The ava reward is delta - c_u * a and lies in
// [-1 - cost, 1). The age-based baselines pay -(age + c_u * a) / age_norm:
// the full raw objective scaled by one constant, so scaling never changes
// which policy is optimal; within an episode these are bounded by
// (episode_len + c_u) / age_norm.
double reward_of(RewardKind kind, const RewardInputs& in, const MetricConfig& metric,
                 double update_cost, double age_norm);

// Fixed-order normalized vector (c, c_hat, upsilon, tau, iota): capacities
// scaled by 1/c_max, ages squashed by x -> 1 - exp(-x/100).
std::array<double, 5> observe_normalized(const Observation& obs, int c_max);

// Episodic MDP wrapper around the simulator: binary update action, selectable
// reward, fixed-length episodes.
//
// The tau component is the remaining delay of the in-flight update under a
// deterministic delay model. Under a stochastic delay model the remainder is
// unknowable, so tau reports slots elapsed since dispatch instead; either way
// tau > 0 exactly while an update is in flight.
class Environment {
public:
    explicit Environment(const EnvConfig& config);

    Observation reset();                   // uses the configured sim seed
    Observation reset(std::uint64_t seed);
    StepResult step(int action);           // throws std::logic_error after done

    const EnvConfig& config() const { return config_; }
    const Simulator& simulator() const { return sim_; }
    bool episode_done() const { return done_; }

private:
    Observation make_observation(bool arrival_this_slot) const;

    EnvConfig config_;
    Simulator sim_;
    std::int64_t steps_taken_ = 0;
    bool done_ = false;
};

} // namespace cfn
