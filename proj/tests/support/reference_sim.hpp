#pragma once

// Naive slot-by-slot reference simulator used as an oracle for the production
// step function. Written directly from the per-slot transition rules with
// precomputed event times; it shares no code with cfn::Simulator.

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace cfn_test {

struct RefScenario {
    int c_max = 1;
    std::int64_t delay_slots = 1;   // both hops, deterministic
    std::int64_t task_slots = 1;    // fixed duration of every task
    std::vector<std::int64_t> arrival_slots; // ascending
    std::vector<int> actions;       // indexed by slot, missing entries mean 0
    std::int64_t horizon = 0;
};

struct RefState {
    int c = 0;
    int c_hat = 0;
    std::int64_t upsilon = 0; // most recent sampled query age
    std::int64_t tau = 0;     // remaining update delay
    std::int64_t iota = 0;    // slots since last arrival
};

// Returns states[0..horizon], where states[t] is the state at the beginning
// of slot t.
inline std::vector<RefState> run_reference(const RefScenario& sc) {
    struct PendingUpdate {
        std::int64_t deliver_slot = 0;
        int payload = 0;
    };

    std::vector<RefState> states;
    states.reserve(static_cast<std::size_t>(sc.horizon + 1));

    int c = sc.c_max;
    int c_hat = sc.c_max;
    std::int64_t upsilon = 0;
    std::int64_t iota = 0;
    std::int64_t reception_slot = 0;
    std::optional<PendingUpdate> pending;
    std::deque<std::int64_t> requests; // server-arrival slots, dispatch order
    std::vector<int> completions(static_cast<std::size_t>(sc.horizon + sc.task_slots + 2), 0);
    std::size_t arrival_idx = 0;

    states.push_back({c, c_hat, upsilon, 0, iota});

    // The arrival slot is a task's first work slot. Acceptances that happen
    // during the arrival phase sit past this slot's completion pass, so a
    // one-slot task delivered with zero transit finishes on the spot.
    auto accept_or_drop = [&](std::int64_t slot, bool during_arrival_phase) {
        if (c <= 0)
            return;
        if (during_arrival_phase && sc.task_slots == 1)
            return; // allocated and released within the same slot
        --c;
        completions[static_cast<std::size_t>(slot + sc.task_slots - 1)] += 1;
    };

    for (std::int64_t t = 0; t < sc.horizon; ++t) {
        // deliveries
        if (pending && pending->deliver_slot == t) {
            c_hat = pending->payload;
            reception_slot = t;
            pending.reset();
        }
        while (!requests.empty() && requests.front() == t) {
            requests.pop_front();
            accept_or_drop(t, false);
        }

        // completions
        for (int done = completions[static_cast<std::size_t>(t)]; done > 0; --done)
            c = std::min(sc.c_max, c + 1);

        // arrivals
        bool arrived = false;
        while (arrival_idx < sc.arrival_slots.size() && sc.arrival_slots[arrival_idx] == t) {
            arrived = true;
            ++arrival_idx;
            if (c_hat > 0) {
                if (sc.delay_slots == 0)
                    accept_or_drop(t, true);
                else
                    requests.push_back(t + sc.delay_slots);
            }
            upsilon = t - reception_slot;
        }

        // update dispatch
        const int action =
            t < static_cast<std::int64_t>(sc.actions.size()) ? sc.actions[static_cast<std::size_t>(t)] : 0;
        if (action == 1 && !pending) {
            if (sc.delay_slots == 0) {
                c_hat = c;
                reception_slot = t;
            } else {
                pending = PendingUpdate{t + sc.delay_slots, c};
            }
        }

        // timers
        iota = arrived ? 0 : iota + 1;
        const std::int64_t next = t + 1;
        const std::int64_t tau = pending ? pending->deliver_slot + 1 - next : 0;
        states.push_back({c, c_hat, upsilon, tau, iota});
    }
    return states;
}

} // namespace cfn_test
