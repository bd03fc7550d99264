#include "cfn/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace cfn {

Simulator::Simulator(const SimConfig& config)
    : config_(config),
      arrival_rng_(splitmix64(config.rng_seed ^ 0x617272697665ULL)),
      delay_rng_(splitmix64(config.rng_seed ^ 0x64656c6179ULL)),
      task_rng_(splitmix64(config.rng_seed ^ 0x7461736bULL)) {
    config_.validate();
    state_.slot = 0;
    state_.c = config_.c_max;
    state_.c_hat = config_.c_max;
    // The initial broadcast of full capacity counts as a reception at slot 0.
    state_.aoi.record_reception(0);
    schedule_next_arrival();
}

void Simulator::schedule_next_arrival() {
    if (config_.arrival.kind == ArrivalModel::Kind::Scripted) {
        const auto& slots = config_.arrival.scripted_slots;
        next_arrival_slot_ = script_index_ < slots.size()
                                 ? slots[script_index_++]
                                 : -1;
        return;
    }
    const std::int64_t gap =
        sample_arrival_gap_slots(config_.arrival, config_.slot_duration_s, arrival_rng_);
    next_arrival_slot_ = state_.slot + gap;
}

void Simulator::deliver_to_server(double work_units, bool progressed_this_slot,
                                  SlotReport& report) {
    if (state_.c == 0) {
        ++report.tasks_dropped;
        return;
    }
    state_.c = std::max(0, state_.c - 1);
    auto duration = static_cast<std::int64_t>(std::ceil(work_units / config_.service_rate));
    duration = std::max<std::int64_t>(1, duration);
    // the arrival slot is the task's first work slot; zero-delay acceptances
    // land after this slot's progression pass, so they account for it here
    if (progressed_this_slot) {
        --duration;
        if (duration == 0) {
            state_.c = std::min(config_.c_max, state_.c + 1);
            ++report.tasks_completed;
            return;
        }
    }
    state_.running_tasks.push_back(duration);
}

SlotReport Simulator::step(int action) {
    SlotReport report;
    const std::int64_t t = state_.slot;

    // 1. tick in-flight timers and deliver what expires this slot
    if (state_.update_in_flight) {
        auto& upd = *state_.update_in_flight;
        if (upd.slots_remaining > 0)
            --upd.slots_remaining;
        if (upd.slots_remaining == 0) {
            state_.c_hat = upd.payload;
            state_.aoi.record_reception(t);
            state_.update_in_flight.reset();
            report.update_delivered = true;
        }
    }
    for (auto& req : state_.requests_in_flight)
        if (req.slots_remaining > 0)
            --req.slots_remaining;
    // same-slot expiries reach the server in dispatch (FIFO) order
    for (auto it = state_.requests_in_flight.begin(); it != state_.requests_in_flight.end();) {
        if (it->slots_remaining == 0) {
            const double work = it->work_units;
            it = state_.requests_in_flight.erase(it);
            deliver_to_server(work, false, report);
        } else {
            ++it;
        }
    }

    // 2. progress running tasks; completions release threads
    for (auto it = state_.running_tasks.begin(); it != state_.running_tasks.end();) {
        if (--(*it) == 0) {
            it = state_.running_tasks.erase(it);
            state_.c = std::min(config_.c_max, state_.c + 1);
            ++report.tasks_completed;
        } else {
            ++it;
        }
    }

    // 3. client arrivals: classify, forward when the AP believes there is
    //    capacity, and sample the query age
    while (next_arrival_slot_ == t) {
        ++report.arrivals_at_ap;
        report.decision_outcomes.push_back(classify_decision(state_.c, state_.c_hat));
        if (state_.c_hat > 0) {
            const double work = task_rng_.uniform(config_.task_size_min, config_.task_size_max);
            const std::int64_t delay = sample_delay_slots(config_.delay, delay_rng_);
            if (delay == 0)
                deliver_to_server(work, true, report);
            else
                state_.requests_in_flight.push_back({delay, work});
        }
        state_.last_qaoi = state_.aoi.aoi(t);
        schedule_next_arrival();
    }

    // 4. update dispatch; a busy channel makes action = 1 a no-op
    report.channel_free = !state_.update_in_flight.has_value();
    if (action == 1 && report.channel_free) {
        const std::int64_t delay = sample_delay_slots(config_.delay, delay_rng_);
        report.update_dispatched = true;
        if (delay == 0) {
            state_.c_hat = state_.c;
            state_.aoi.record_reception(t);
            report.update_delivered = true;
        } else {
            state_.update_in_flight = InFlightUpdate{state_.c, delay, t};
        }
    }

    // 5. timers
    state_.slots_since_last_arrival =
        report.arrivals_at_ap > 0 ? 0 : state_.slots_since_last_arrival + 1;
    state_.slot = t + 1;
    return report;
}

} // namespace cfn
