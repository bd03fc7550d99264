#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "cfn/metrics.hpp"
#include "cfn/rng.hpp"
#include "cfn/sim_config.hpp"

namespace cfn {

// A status update in transit toward the access point. At most one exists at
// any time (the channel is serialized).
struct InFlightUpdate {
    int payload = 0;                 // server capacity captured at dispatch
    std::int64_t slots_remaining = 0;
    std::int64_t dispatch_slot = 0;
};

// A forwarded client request in transit toward the server.
struct InFlightRequest {
    std::int64_t slots_remaining = 0;
    double work_units = 0.0;
};

// Ground-truth state at the beginning of a slot.
struct WorldState {
    std::int64_t slot = 0;
    int c = 0;      // available server threads
    int c_hat = 0;  // capacity as last seen by the access point
    std::vector<std::int64_t> running_tasks; // remaining slots per busy thread
    std::optional<InFlightUpdate> update_in_flight;
    std::deque<InFlightRequest> requests_in_flight; // FIFO
    AoiTracker aoi;                       // reception bookkeeping at the AP
    std::int64_t slots_since_last_arrival = 0; // iota
    std::int64_t last_qaoi = 0;           // most recent sampled query age
};

// What happened during one slot.
struct SlotReport {
    int arrivals_at_ap = 0;
    bool update_delivered = false;
    bool update_dispatched = false;
    bool channel_free = false; // channel was idle when the dispatch decision ran
    std::vector<Outcome> decision_outcomes; // one entry per arrival
    int tasks_completed = 0;
    int tasks_dropped = 0;
};

// Slot-accurate simulation of server, access point, client arrivals and the
// delayed message channels. Single-threaded; instances are independent.
//
// Each step advances exactly one slot, in this order:
//   1. in-flight timers tick; an expiring update sets c_hat, expiring
//      forwarded requests reach the server (accept or drop)
//   2. running tasks progress; completions release threads
//   3. client arrivals: classify the decision against the current (c, c_hat),
//      forward when c_hat > 0, sample the query age
//   4. action = 1 dispatches an update carrying the current c if the channel
//      is free; otherwise it is a no-op
//   5. timers: iota, slot counter
class Simulator {
public:
    explicit Simulator(const SimConfig& config);

    const WorldState& state() const { return state_; }
    const SimConfig& config() const { return config_; }

    SlotReport step(int action);

private:
    void deliver_to_server(double work_units, bool progressed_this_slot, SlotReport& report);
    void schedule_next_arrival();

    SimConfig config_;
    WorldState state_;
    Rng arrival_rng_;
    Rng delay_rng_;
    Rng task_rng_;
    std::int64_t next_arrival_slot_ = -1; // -1: exhausted (scripted mode only)
    std::size_t script_index_ = 0;
};

} // namespace cfn
