#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace cfn::rl {

// Shared-trunk actor-critic: obs -> tanh -> tanh -> {2 action logits, value}.
// Parameters live in one flat vector so the optimizer and the checkpoint
// format can treat them uniformly.
struct NetShape {
    int obs_dim = 5;
    int hidden1 = 64;
    int hidden2 = 64;
    int act_dim = 2;

    int w1_count() const { return hidden1 * obs_dim; }
    int w2_count() const { return hidden2 * hidden1; }
    int wp_count() const { return act_dim * hidden2; }
    int wv_count() const { return hidden2; }

    int off_w1() const { return 0; }
    int off_b1() const { return off_w1() + w1_count(); }
    int off_w2() const { return off_b1() + hidden1; }
    int off_b2() const { return off_w2() + w2_count(); }
    int off_wp() const { return off_b2() + hidden2; }
    int off_bp() const { return off_wp() + wp_count(); }
    int off_wv() const { return off_bp() + act_dim; }
    int off_bv() const { return off_wv() + wv_count(); }
    int param_count() const { return off_bv() + 1; }

    bool operator==(const NetShape&) const = default;
};

struct ForwardOut {
    std::array<double, 2> probs{};
    std::array<double, 2> log_probs{};
    double value = 0.0;
};

// Activations kept around for the backward pass.
struct ForwardCache {
    std::vector<double> x, a1, a2;
    ForwardOut out;
};

class ActorCritic {
public:
    explicit ActorCritic(NetShape shape);

    // Xavier-uniform trunk, small policy head so the initial policy is close
    // to uniform.
    static ActorCritic initialized(NetShape shape, std::uint64_t seed);

    ForwardOut forward(std::span<const double> obs) const;
    void forward(std::span<const double> obs, ForwardCache& cache) const;

    // Accumulates dL/dtheta into grad given dL/dlogits and dL/dvalue for one
    // sample whose activations are in cache.
    void backward(const ForwardCache& cache, const std::array<double, 2>& dlogits,
                  double dvalue, std::vector<double>& grad) const;

    const NetShape& shape() const { return shape_; }
    std::vector<double>& params() { return theta_; }
    const std::vector<double>& params() const { return theta_; }
    bool params_finite() const;

private:
    NetShape shape_;
    std::vector<double> theta_;
};

// Adam optimizer over a flat parameter vector (decay 0.9 / 0.999, eps 1e-8).
class Adam {
public:
    Adam(double learning_rate, std::size_t param_count);

    void step(std::vector<double>& theta, const std::vector<double>& grad);
    double learning_rate() const { return lr_; }

private:
    double lr_;
    std::vector<double> m_, v_;
    std::int64_t t_ = 0;
};

} // namespace cfn::rl
