#include <doctest.h>

#include <stdexcept>

#include "cfn/policies.hpp"

using namespace cfn;

TEST_CASE("heuristic policies") {
    Observation obs;
    obs.c = 2;
    obs.c_hat = 3;

    Policy never = Policy::never();
    Policy always = Policy::always();
    for (int t = 0; t < 100; ++t) {
        CHECK(never.act(obs) == 0);
        CHECK(always.act(obs) == 1);
    }

    Policy periodic = Policy::periodic(25);
    std::vector<int> fired;
    for (int t = 0; t < 100; ++t)
        if (periodic.act(obs) == 1)
            fired.push_back(t);
    CHECK(fired == std::vector<int>{0, 25, 50, 75});

    CHECK_THROWS_AS(Policy::periodic(0), std::invalid_argument);
}

TEST_CASE("greedy threshold acts on the age-and-value score") {
    MetricConfig metric;
    Policy greedy = Policy::greedy_threshold(0.0, metric);

    Observation mismatch; // negative consistency with positive query age
    mismatch.c = 0;
    mismatch.c_hat = 5;
    mismatch.upsilon = 40;
    CHECK(greedy.act(mismatch) == 1);

    Observation consistent;
    consistent.c = 3;
    consistent.c_hat = 3;
    consistent.upsilon = 40;
    CHECK(greedy.act(consistent) == 0);

    Observation fresh; // zero age scores zero, not below the threshold
    fresh.c = 0;
    fresh.c_hat = 5;
    fresh.upsilon = 0;
    CHECK(greedy.act(fresh) == 0);

    CHECK_THROWS_AS(Policy::greedy_threshold(1.5, metric), std::invalid_argument);
}

TEST_CASE("learned policy is a deterministic argmax") {
    rl::ActorCritic net = rl::ActorCritic::initialized(rl::NetShape{5, 8, 8, 2}, 77);
    Policy p1 = Policy::learned(net, 4);
    Policy p2 = Policy::learned(net, 4);
    Observation obs;
    obs.c = 1;
    obs.c_hat = 4;
    obs.upsilon = 30;
    obs.iota = 3;
    const int a = p1.act(obs);
    for (int t = 0; t < 20; ++t)
        CHECK(p2.act(obs) == a);

    // uniform output ties break toward not updating
    Policy uniform = Policy::learned(rl::ActorCritic(rl::NetShape{5, 8, 8, 2}), 4);
    CHECK(uniform.act(obs) == 0);
}

TEST_CASE("learned policy rejects incompatible networks") {
    CHECK_THROWS_AS(Policy::learned(rl::ActorCritic(rl::NetShape{7, 8, 8, 2}), 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(Policy::learned(rl::ActorCritic(rl::NetShape{5, 8, 8, 3}), 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(Policy::learned(rl::ActorCritic(rl::NetShape{5, 8, 8, 2}), 0),
                    std::invalid_argument);
}
