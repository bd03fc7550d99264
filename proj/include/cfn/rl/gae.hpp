#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cfn::rl {

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns; // advantages + values
};

// Generalized advantage estimation over a (possibly multi-episode) rollout.
// delta_t = r_t + gamma * v_{t+1} * (1 - done_t) - v_t, exponentially
// accumulated with factor gamma * lambda; last_value bootstraps past the end
// of the buffer when the final transition is not terminal.
GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double gamma, double lambda,
              double last_value = 0.0);

} // namespace cfn::rl
