#include "cfn/metrics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace cfn {

void MetricConfig::validate() const {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("metric config: epsilon must be positive");
    if (!(k > 0.0))
        throw std::invalid_argument("metric config: k must be positive");
}

const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::TruePositive: return "TP";
    case Outcome::TrueNegative: return "TN";
    case Outcome::FalsePositive: return "FP";
    case Outcome::FalseNegative: return "FN";
    }
    return "?";
}

double consistency(double c, double c_hat, const MetricConfig& cfg) {
    assert(c >= 0.0 && c_hat >= 0.0);
    if (c <= cfg.epsilon && c_hat <= cfg.epsilon)
        return 1.0;
    const double lo = std::min(c, c_hat);
    const double hi = std::max(c, c_hat);
    return 2.0 * lo / (hi + cfg.epsilon) - 1.0;
}

double phi(double upsilon, const MetricConfig& cfg) {
    assert(upsilon >= 0.0);
    return -std::expm1(-cfg.k * upsilon);
}

double ava(double c, double c_hat, double upsilon, const MetricConfig& cfg) {
    return phi(upsilon, cfg) * consistency(c, c_hat, cfg);
}

std::int64_t aop(const AoiTracker& tracker, std::int64_t t, std::int64_t processing_slots) {
    return tracker.aoi(t) + processing_slots;
}

Outcome classify_decision(int c, int c_hat) {
    assert(c >= 0 && c_hat >= 0);
    if (c_hat > 0)
        return c > 0 ? Outcome::TruePositive : Outcome::FalsePositive;
    return c > 0 ? Outcome::FalseNegative : Outcome::TrueNegative;
}

void RunMetrics::record_outcome(Outcome o) {
    ++requests;
    switch (o) {
    case Outcome::TruePositive: ++tp; break;
    case Outcome::TrueNegative: ++tn; break;
    case Outcome::FalsePositive: ++fp; break;
    case Outcome::FalseNegative: ++fn; break;
    }
}

RunSummary finalize(const RunMetrics& m, double slot_duration_s) {
    if (m.total_slots <= 0)
        throw std::invalid_argument("finalize: run covered no slots");
    RunSummary s;
    s.update_rate_per_s = static_cast<double>(m.total_updates) /
                          (static_cast<double>(m.total_slots) * slot_duration_s);
    if (m.requests > 0)
        s.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.requests);
    s.avg_aoi_slots = static_cast<double>(m.aoi_sum) / static_cast<double>(m.total_slots);
    return s;
}

} // namespace cfn
