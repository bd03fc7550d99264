#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>

#include "cfn/rng.hpp"
#include "cfn/sim_config.hpp"
#include "cfn/simulator.hpp"
#include "support/reference_sim.hpp"

using namespace cfn;

namespace {

SimConfig scripted_config(int c_max, std::int64_t delay, double task_size,
                          std::vector<std::int64_t> arrivals, std::uint64_t seed = 9) {
    SimConfig cfg;
    cfg.c_max = c_max;
    cfg.service_rate = 2.0;
    cfg.task_size_min = task_size;
    cfg.task_size_max = task_size;
    cfg.delay = DelayModel::deterministic(delay);
    cfg.arrival = ArrivalModel::scripted(std::move(arrivals));
    cfg.rng_seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("initial state is all idle") {
    SimConfig cfg = scripted_config(3, 3, 40.0, {});
    Simulator sim(cfg);
    const WorldState& w = sim.state();
    CHECK(w.slot == 0);
    CHECK(w.c == 3);
    CHECK(w.c_hat == 3);
    CHECK(w.running_tasks.empty());
    CHECK_FALSE(w.update_in_flight.has_value());
    CHECK(w.requests_in_flight.empty());
    CHECK(w.last_qaoi == 0);
    CHECK(w.slots_since_last_arrival == 0);

    Simulator single(scripted_config(1, 3, 40.0, {}));
    CHECK(single.state().c == 1);
    CHECK(single.state().running_tasks.empty());
    CHECK(static_cast<int>(single.state().running_tasks.size()) ==
          single.config().c_max - single.state().c);
}

TEST_CASE("invalid configuration is rejected") {
    SimConfig cfg;
    cfg.c_max = 0;
    CHECK_THROWS_AS(Simulator{cfg}, std::invalid_argument);
    cfg = SimConfig{};
    cfg.service_rate = 0.0;
    CHECK_THROWS_AS(Simulator{cfg}, std::invalid_argument);
    cfg = SimConfig{};
    cfg.task_size_min = 50.0;
    cfg.task_size_max = 40.0;
    CHECK_THROWS_AS(Simulator{cfg}, std::invalid_argument);
    cfg = SimConfig{};
    cfg.arrival = ArrivalModel::uniform(0.075, 0.05);
    CHECK_THROWS_AS(Simulator{cfg}, std::invalid_argument);
    cfg = SimConfig{};
    cfg.delay = DelayModel::stochastic(4, 0.0);
    CHECK_THROWS_AS(Simulator{cfg}, std::invalid_argument);
}

TEST_CASE("delay sampling") {
    Rng rng(21);
    const DelayModel det = DelayModel::deterministic(3);
    for (int i = 0; i < 100; ++i)
        CHECK(sample_delay_slots(det, rng) == 3);

    const DelayModel stoch = DelayModel::stochastic(4, 1.0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const std::int64_t d = sample_delay_slots(stoch, rng);
        CHECK(d >= 4);
        sum += static_cast<double>(d);
    }
    // E[ceil(Exp(1))] = 1 / (1 - exp(-1))
    const double expected = 4.0 + 1.0 / (1.0 - std::exp(-1.0));
    CHECK(sum / n == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("arrival gap sampling") {
    Rng rng(22);
    CHECK(sample_arrival_gap_slots(ArrivalModel::deterministic(0.025), 0.001, rng) == 25);
    CHECK(sample_arrival_gap_slots(ArrivalModel::deterministic(0.001), 0.001, rng) == 1);
    // rounds to whole slots with a floor of one
    CHECK(sample_arrival_gap_slots(ArrivalModel::deterministic(0.0001), 0.001, rng) == 1);
    const ArrivalModel unif = ArrivalModel::uniform(0.05, 0.075);
    for (int i = 0; i < 20000; ++i) {
        const std::int64_t g = sample_arrival_gap_slots(unif, 0.001, rng);
        CHECK(g >= 50);
        CHECK(g <= 75);
    }
}

TEST_CASE("forwarded request consumes a thread after its transit delay") {
    // arrival at slot 1, delay 1: reaches the server during slot 2
    Simulator sim(scripted_config(3, 1, 40.0, {1}));
    sim.step(0); // slot 0
    SlotReport r1 = sim.step(0); // slot 1: arrival, forwarded
    CHECK(r1.arrivals_at_ap == 1);
    CHECK(sim.state().c == 3);
    sim.step(0); // slot 2: request reaches the server
    CHECK(sim.state().c == 2);
    CHECK(sim.state().running_tasks.size() == 1);
}

TEST_CASE("task completion releases a thread, capped at c_max") {
    // task of exactly 1 slot: ceil(2/2) = 1
    Simulator sim(scripted_config(1, 1, 2.0, {1}));
    sim.step(0);
    sim.step(0); // arrival forwarded
    const SlotReport r = sim.step(0); // accepted and finished within slot 2
    CHECK(r.tasks_completed == 1);
    CHECK(sim.state().c == 1);
    CHECK(sim.state().running_tasks.empty());
}

TEST_CASE("update delivery rewrites the observed capacity") {
    // capacity drops to 0 first, then an update carries the new value
    Simulator sim(scripted_config(1, 2, 40.0, {1}));
    for (int t = 0; t < 4; ++t)
        sim.step(0);
    CHECK(sim.state().c == 0); // accepted during slot 3
    CHECK(sim.state().c_hat == 1);

    sim.step(1); // slot 4: dispatch update with payload 0
    const WorldState& w = sim.state();
    REQUIRE(w.update_in_flight.has_value());
    CHECK(w.update_in_flight->payload == 0);
    CHECK(w.update_in_flight->slots_remaining == 2);
    CHECK(w.c_hat == 1);

    sim.step(0); // slot 5: still in transit
    CHECK(sim.state().update_in_flight->slots_remaining == 1);
    CHECK(sim.state().c_hat == 1);

    const SlotReport r = sim.step(0); // slot 6: timer expires
    CHECK(r.update_delivered);
    CHECK(sim.state().c_hat == 0);
    CHECK_FALSE(sim.state().update_in_flight.has_value());
    CHECK(sim.state().aoi.last_reception_slot == 6);
}

TEST_CASE("dispatch while an update is in flight is a no-op") {
    Simulator sim(scripted_config(2, 3, 40.0, {}));
    SlotReport r0 = sim.step(1);
    CHECK(r0.update_dispatched);
    CHECK(r0.channel_free);
    SlotReport r1 = sim.step(1);
    CHECK_FALSE(r1.update_dispatched);
    CHECK_FALSE(r1.channel_free);
    // with always-update and delay d, dispatches land every d slots
    Simulator always(scripted_config(2, 3, 40.0, {}));
    std::vector<std::int64_t> dispatch_slots;
    for (std::int64_t t = 0; t < 30; ++t)
        if (always.step(1).update_dispatched)
            dispatch_slots.push_back(t);
    CHECK(dispatch_slots == std::vector<std::int64_t>{0, 3, 6, 9, 12, 15, 18, 21, 24, 27});
}

TEST_CASE("never updating leaves the observed capacity at its initial value") {
    SimConfig cfg;
    cfg.c_max = 2;
    cfg.arrival = ArrivalModel::deterministic(0.01);
    cfg.delay = DelayModel::stochastic(4, 1.0);
    cfg.rng_seed = 5;
    Simulator sim(cfg);
    for (int t = 0; t < 3000; ++t) {
        sim.step(0);
        CHECK(sim.state().c_hat == 2);
    }
}

TEST_CASE("capacity conservation holds at every slot") {
    SimConfig cfg;
    cfg.c_max = 3;
    cfg.arrival = ArrivalModel::deterministic(0.005);
    cfg.delay = DelayModel::stochastic(2, 0.7);
    cfg.rng_seed = 17;
    Simulator sim(cfg);
    Rng actions(3);
    for (int t = 0; t < 5000; ++t) {
        sim.step(actions.u01() < 0.2 ? 1 : 0);
        CHECK(sim.state().c + static_cast<int>(sim.state().running_tasks.size()) == cfg.c_max);
        CHECK(sim.state().c >= 0);
        CHECK(sim.state().c_hat >= 0);
        CHECK(sim.state().c <= cfg.c_max);
        CHECK(sim.state().c_hat <= cfg.c_max);
    }
}

TEST_CASE("observed capacity changes only on delivery slots") {
    SimConfig cfg;
    cfg.c_max = 4;
    cfg.arrival = ArrivalModel::deterministic(0.012);
    cfg.delay = DelayModel::stochastic(3, 1.0);
    cfg.rng_seed = 23;
    Simulator sim(cfg);
    Rng actions(29);
    int prev = sim.state().c_hat;
    for (int t = 0; t < 4000; ++t) {
        const SlotReport r = sim.step(actions.u01() < 0.3 ? 1 : 0);
        if (!r.update_delivered)
            CHECK(sim.state().c_hat == prev);
        prev = sim.state().c_hat;
    }
}

TEST_CASE("identical seed and actions give a bit-identical trajectory") {
    SimConfig cfg;
    cfg.c_max = 3;
    cfg.arrival = ArrivalModel::uniform(0.004, 0.006);
    cfg.delay = DelayModel::stochastic(4, 1.0);
    cfg.rng_seed = 77;
    Simulator a(cfg);
    Simulator b(cfg);
    Rng actions(101);
    for (int t = 0; t < 4000; ++t) {
        const int act = actions.u01() < 0.25 ? 1 : 0;
        a.step(act);
        b.step(act);
        CHECK(a.state().c == b.state().c);
        CHECK(a.state().c_hat == b.state().c_hat);
        CHECK(a.state().last_qaoi == b.state().last_qaoi);
        CHECK(a.state().slots_since_last_arrival == b.state().slots_since_last_arrival);
        CHECK(a.state().running_tasks == b.state().running_tasks);
        CHECK(a.state().aoi.last_reception_slot == b.state().aoi.last_reception_slot);
    }
}

TEST_CASE("decisions see the capacity delivered in the same slot") {
    // c_max 1: the slot-1 arrival exhausts the server (accepted during slot
    // 3). An update dispatched at slot 8 carrying c = 0 is delivered during
    // slot 10, exactly when the second arrival shows up: the decision must
    // already see c_hat = 0 and classify as a true negative.
    Simulator sim(scripted_config(1, 2, 40.0, {1, 10}));
    std::vector<Outcome> outcomes;
    for (std::int64_t t = 0; t < 12; ++t) {
        const SlotReport r = sim.step(t == 8 ? 1 : 0);
        for (Outcome o : r.decision_outcomes)
            outcomes.push_back(o);
    }
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0] == Outcome::TruePositive);
    CHECK(outcomes[1] == Outcome::TrueNegative);
}

TEST_CASE("same-slot arrivals each get a decision and the same query age") {
    Simulator sim(scripted_config(3, 2, 40.0, {5, 5}));
    for (int t = 0; t < 5; ++t)
        sim.step(0);
    const SlotReport r = sim.step(0);
    CHECK(r.arrivals_at_ap == 2);
    CHECK(r.decision_outcomes.size() == 2); // one entry per arrival
    CHECK(sim.state().last_qaoi == 5);
    CHECK(sim.state().requests_in_flight.size() == 2);
}

TEST_CASE("requests reaching an exhausted server are dropped") {
    // both arrivals are forwarded on the stale view; the second finds c = 0
    Simulator sim(scripted_config(1, 1, 40.0, {1, 5}));
    int dropped = 0;
    for (std::int64_t t = 0; t < 10; ++t)
        dropped += sim.step(0).tasks_dropped;
    CHECK(dropped == 1);
    CHECK(sim.state().running_tasks.size() == 1);
}

TEST_CASE("step trajectories match the naive reference simulator") {
    Rng gen(4242);
    for (int scenario = 0; scenario < 12; ++scenario) {
        cfn_test::RefScenario sc;
        sc.c_max = static_cast<int>(gen.uniform_int(1, 5));
        sc.delay_slots = gen.uniform_int(0, 6);
        sc.task_slots = gen.uniform_int(1, 30);
        sc.horizon = 300;
        std::set<std::int64_t> arrival_set;
        const int n_arrivals = static_cast<int>(gen.uniform_int(5, 60));
        for (int i = 0; i < n_arrivals; ++i)
            arrival_set.insert(gen.uniform_int(1, sc.horizon - 1));
        sc.arrival_slots.assign(arrival_set.begin(), arrival_set.end());
        sc.actions.assign(static_cast<std::size_t>(sc.horizon), 0);
        for (auto& a : sc.actions)
            a = gen.u01() < 0.15 ? 1 : 0;

        const auto expected = cfn_test::run_reference(sc);

        SimConfig cfg = scripted_config(sc.c_max, sc.delay_slots,
                                        static_cast<double>(2 * sc.task_slots),
                                        sc.arrival_slots);
        Simulator sim(cfg);
        for (std::int64_t t = 0; t < sc.horizon; ++t) {
            sim.step(sc.actions[static_cast<std::size_t>(t)]);
            const WorldState& w = sim.state();
            const auto& ref = expected[static_cast<std::size_t>(t + 1)];
            REQUIRE(w.c == ref.c);
            REQUIRE(w.c_hat == ref.c_hat);
            REQUIRE(w.last_qaoi == ref.upsilon);
            const std::int64_t tau = w.update_in_flight ? w.update_in_flight->slots_remaining : 0;
            REQUIRE(tau == ref.tau);
            REQUIRE(w.slots_since_last_arrival == ref.iota);
        }
    }
}
