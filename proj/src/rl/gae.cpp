#include "cfn/rl/gae.hpp"

#include <stdexcept>

namespace cfn::rl {

GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double gamma, double lambda,
              double last_value) {
    const std::size_t n = rewards.size();
    if (values.size() != n || dones.size() != n)
        throw std::invalid_argument("gae: sequence lengths differ");
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double running = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const double not_done = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < n) ? values[i + 1] : last_value;
        const double delta = rewards[i] + gamma * next_value * not_done - values[i];
        running = delta + gamma * lambda * not_done * running;
        out.advantages[i] = running;
        out.returns[i] = running + values[i];
    }
    return out;
}

} // namespace cfn::rl
