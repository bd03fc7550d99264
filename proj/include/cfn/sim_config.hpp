#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfn/rng.hpp"

namespace cfn {

// Client request arrival process. Scripted arrivals are for replay and
// cross-check scenarios; production runs use the deterministic or uniform
// inter-arrival models.
struct ArrivalModel {
    enum class Kind { Deterministic, Uniform, Scripted };

    Kind kind = Kind::Deterministic;
    double interval_s = 0.025;           // Deterministic
    double min_s = 0.0, max_s = 0.0;     // Uniform
    std::vector<std::int64_t> scripted_slots; // Scripted, ascending

    static ArrivalModel deterministic(double interval_s);
    static ArrivalModel uniform(double min_s, double max_s);
    static ArrivalModel scripted(std::vector<std::int64_t> slots);
};

// Network delay for both hops (status updates toward the AP and request
// forwarding toward the server), in whole slots.
struct DelayModel {
    enum class Kind { Deterministic, Stochastic };

    Kind kind = Kind::Deterministic;
    std::int64_t slots = 3;       // Deterministic
    std::int64_t base_slots = 4;  // Stochastic: base + ceil(Exp(rate))
    double exp_rate = 1.0;

    static DelayModel deterministic(std::int64_t slots);
    static DelayModel stochastic(std::int64_t base_slots, double exp_rate);
};

struct SimConfig {
    double slot_duration_s = 0.001;
    int c_max = 4;                 // maximum concurrent server threads
    double service_rate = 2.0;     // work units processed per thread per slot
    double task_size_min = 40.0;   // uniform workload bounds, work units
    double task_size_max = 45.0;
    ArrivalModel arrival = ArrivalModel::deterministic(0.025);
    DelayModel delay = DelayModel::stochastic(4, 1.0);
    std::uint64_t rng_seed = 1;

    void validate() const; // throws std::invalid_argument

    // ceil(mean task size / service rate): the mean processing duration.
    std::int64_t mean_processing_slots() const;
};

std::int64_t sample_delay_slots(const DelayModel& model, Rng& rng);

// Inter-arrival gap in whole slots, never less than one.
std::int64_t sample_arrival_gap_slots(const ArrivalModel& model, double slot_duration_s, Rng& rng);

// Stable short labels used in CSV output and CLI parsing.
std::string to_string(const ArrivalModel& m);
std::string to_string(const DelayModel& m);
ArrivalModel parse_arrival_model(const std::string& text);
DelayModel parse_delay_model(const std::string& text);

} // namespace cfn
