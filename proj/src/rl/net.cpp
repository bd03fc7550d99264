#include "cfn/rl/net.hpp"

#include <cmath>
#include <stdexcept>

#include "cfn/rng.hpp"

namespace cfn::rl {

ActorCritic::ActorCritic(NetShape shape)
    : shape_(shape), theta_(static_cast<std::size_t>(shape.param_count()), 0.0) {}

namespace {

void fill_xavier(std::vector<double>& theta, int offset, int rows, int cols, double gain,
                 cfn::Rng& rng) {
    const double bound = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (int i = 0; i < rows * cols; ++i)
        theta[static_cast<std::size_t>(offset + i)] = rng.uniform(-bound, bound);
}

} // namespace

ActorCritic ActorCritic::initialized(NetShape shape, std::uint64_t seed) {
    ActorCritic net(shape);
    cfn::Rng rng(splitmix64(seed ^ 0x6e6574ULL));
    fill_xavier(net.theta_, shape.off_w1(), shape.hidden1, shape.obs_dim, 1.0, rng);
    fill_xavier(net.theta_, shape.off_w2(), shape.hidden2, shape.hidden1, 1.0, rng);
    fill_xavier(net.theta_, shape.off_wp(), shape.act_dim, shape.hidden2, 0.01, rng);
    fill_xavier(net.theta_, shape.off_wv(), 1, shape.hidden2, 1.0, rng);
    // conservative start: bias the non-default actions down so an untrained
    // agent does not flood its actuator (here, the serialized update channel)
    for (int a = 1; a < shape.act_dim; ++a)
        net.theta_[static_cast<std::size_t>(shape.off_bp() + a)] = -3.0;
    return net;
}

ForwardOut ActorCritic::forward(std::span<const double> obs) const {
    ForwardCache cache;
    forward(obs, cache);
    return cache.out;
}

void ActorCritic::forward(std::span<const double> obs, ForwardCache& cache) const {
    if (obs.size() != static_cast<std::size_t>(shape_.obs_dim))
        throw std::invalid_argument("observation width does not match the network input");
    for (double v : obs)
        if (!std::isfinite(v))
            throw std::invalid_argument("non-finite observation rejected");

    const double* th = theta_.data();
    cache.x.assign(obs.begin(), obs.end());
    cache.a1.assign(static_cast<std::size_t>(shape_.hidden1), 0.0);
    cache.a2.assign(static_cast<std::size_t>(shape_.hidden2), 0.0);

    const double* w1 = th + shape_.off_w1();
    const double* b1 = th + shape_.off_b1();
    for (int i = 0; i < shape_.hidden1; ++i) {
        double z = b1[i];
        for (int j = 0; j < shape_.obs_dim; ++j)
            z += w1[i * shape_.obs_dim + j] * cache.x[static_cast<std::size_t>(j)];
        cache.a1[static_cast<std::size_t>(i)] = std::tanh(z);
    }

    const double* w2 = th + shape_.off_w2();
    const double* b2 = th + shape_.off_b2();
    for (int i = 0; i < shape_.hidden2; ++i) {
        double z = b2[i];
        for (int j = 0; j < shape_.hidden1; ++j)
            z += w2[i * shape_.hidden1 + j] * cache.a1[static_cast<std::size_t>(j)];
        cache.a2[static_cast<std::size_t>(i)] = std::tanh(z);
    }

    const double* wp = th + shape_.off_wp();
    const double* bp = th + shape_.off_bp();
    std::array<double, 2> logits{};
    for (int i = 0; i < shape_.act_dim; ++i) {
        double z = bp[i];
        for (int j = 0; j < shape_.hidden2; ++j)
            z += wp[i * shape_.hidden2 + j] * cache.a2[static_cast<std::size_t>(j)];
        logits[static_cast<std::size_t>(i)] = z;
    }

    // stable softmax / log-softmax
    const double zmax = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - zmax);
    const double e1 = std::exp(logits[1] - zmax);
    const double lse = zmax + std::log(e0 + e1);
    cache.out.log_probs = {logits[0] - lse, logits[1] - lse};
    cache.out.probs = {std::exp(cache.out.log_probs[0]), std::exp(cache.out.log_probs[1])};

    const double* wv = th + shape_.off_wv();
    double v = th[shape_.off_bv()];
    for (int j = 0; j < shape_.hidden2; ++j)
        v += wv[j] * cache.a2[static_cast<std::size_t>(j)];
    cache.out.value = v;
}

void ActorCritic::backward(const ForwardCache& cache, const std::array<double, 2>& dlogits,
                           double dvalue, std::vector<double>& grad) const {
    double* g = grad.data();
    const double* th = theta_.data();

    // heads
    double* gwp = g + shape_.off_wp();
    double* gbp = g + shape_.off_bp();
    for (int i = 0; i < shape_.act_dim; ++i) {
        gbp[i] += dlogits[static_cast<std::size_t>(i)];
        for (int j = 0; j < shape_.hidden2; ++j)
            gwp[i * shape_.hidden2 + j] +=
                dlogits[static_cast<std::size_t>(i)] * cache.a2[static_cast<std::size_t>(j)];
    }
    double* gwv = g + shape_.off_wv();
    g[shape_.off_bv()] += dvalue;
    for (int j = 0; j < shape_.hidden2; ++j)
        gwv[j] += dvalue * cache.a2[static_cast<std::size_t>(j)];

    // into the trunk
    std::vector<double> da2(static_cast<std::size_t>(shape_.hidden2), 0.0);
    const double* wp = th + shape_.off_wp();
    const double* wv = th + shape_.off_wv();
    for (int j = 0; j < shape_.hidden2; ++j) {
        double d = dvalue * wv[j];
        for (int i = 0; i < shape_.act_dim; ++i)
            d += dlogits[static_cast<std::size_t>(i)] * wp[i * shape_.hidden2 + j];
        da2[static_cast<std::size_t>(j)] = d;
    }

    std::vector<double> dz2(static_cast<std::size_t>(shape_.hidden2), 0.0);
    for (int j = 0; j < shape_.hidden2; ++j) {
        const double a = cache.a2[static_cast<std::size_t>(j)];
        dz2[static_cast<std::size_t>(j)] = da2[static_cast<std::size_t>(j)] * (1.0 - a * a);
    }

    double* gw2 = g + shape_.off_w2();
    double* gb2 = g + shape_.off_b2();
    const double* w2 = th + shape_.off_w2();
    std::vector<double> da1(static_cast<std::size_t>(shape_.hidden1), 0.0);
    for (int i = 0; i < shape_.hidden2; ++i) {
        const double d = dz2[static_cast<std::size_t>(i)];
        gb2[i] += d;
        for (int j = 0; j < shape_.hidden1; ++j) {
            gw2[i * shape_.hidden1 + j] += d * cache.a1[static_cast<std::size_t>(j)];
            da1[static_cast<std::size_t>(j)] += d * w2[i * shape_.hidden1 + j];
        }
    }

    double* gw1 = g + shape_.off_w1();
    double* gb1 = g + shape_.off_b1();
    for (int i = 0; i < shape_.hidden1; ++i) {
        const double a = cache.a1[static_cast<std::size_t>(i)];
        const double d = da1[static_cast<std::size_t>(i)] * (1.0 - a * a);
        gb1[i] += d;
        for (int j = 0; j < shape_.obs_dim; ++j)
            gw1[i * shape_.obs_dim + j] += d * cache.x[static_cast<std::size_t>(j)];
    }
}

bool ActorCritic::params_finite() const {
    for (double v : theta_)
        if (!std::isfinite(v))
            return false;
    return true;
}

Adam::Adam(double learning_rate, std::size_t param_count)
    : lr_(learning_rate), m_(param_count, 0.0), v_(param_count, 0.0) {}

void Adam::step(std::vector<double>& theta, const std::vector<double>& grad) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
        v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        theta[i] -= lr_ * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace cfn::rl
