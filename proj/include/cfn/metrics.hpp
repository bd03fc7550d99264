#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace cfn {

struct MetricConfig {
    double epsilon = 0.01; // keeps the consistency ratio finite at zero capacity
    double k = 0.02;       // decay constant of the normalized query age
    bool qaoi_hold = false; // hold the last sampled query age between arrivals
                            // instead of resetting it to zero

    void validate() const; // throws std::invalid_argument
};

// Outcome of one forwarding decision, comparing the access point's view
// against the true server capacity at the arrival instant.
enum class Outcome : std::uint8_t {
    TruePositive,
    TrueNegative,
    FalsePositive,
    FalseNegative,
};

const char* to_string(Outcome o);

// Age-of-information bookkeeping: the slot of the most recent update received
// at the access point. Before any reception, age counts from slot 0.
struct AoiTracker {
    std::optional<std::int64_t> last_reception_slot;

    void record_reception(std::int64_t slot) { last_reception_slot = slot; }

    std::int64_t aoi(std::int64_t t) const {
        return t - last_reception_slot.value_or(0);
    }
};

// Capacity consistency in [-1, 1]; 1 when both sides agree that the server is
// exhausted, otherwise a scaled min/max ratio. Symmetric in its arguments.
double consistency(double c, double c_hat, const MetricConfig& cfg);

// Normalized query age in [0, 1): 1 - exp(-k * upsilon).
double phi(double upsilon, const MetricConfig& cfg);

// Age-and-value score: phi(upsilon) * consistency(c, c_hat).
double ava(double c, double c_hat, double upsilon, const MetricConfig& cfg);

// Age including the mean processing stage, used as a baseline reward signal.
std::int64_t aop(const AoiTracker& tracker, std::int64_t t, std::int64_t processing_slots);

Outcome classify_decision(int c, int c_hat);

// Per-run aggregates.
struct RunMetrics {
    std::int64_t total_updates = 0;
    std::int64_t total_slots = 0;
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t requests = 0;
    std::int64_t aoi_sum = 0;

    void record_outcome(Outcome o);
};

struct RunSummary {
    double update_rate_per_s = 0.0;
    std::optional<double> accuracy; // absent when the run saw no requests
    double avg_aoi_slots = 0.0;
};

RunSummary finalize(const RunMetrics& m, double slot_duration_s);

} // namespace cfn
