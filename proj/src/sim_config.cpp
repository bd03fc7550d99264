#include "cfn/sim_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cfn {

ArrivalModel ArrivalModel::deterministic(double interval_s) {
    ArrivalModel m;
    m.kind = Kind::Deterministic;
    m.interval_s = interval_s;
    return m;
}

ArrivalModel ArrivalModel::uniform(double min_s, double max_s) {
    ArrivalModel m;
    m.kind = Kind::Uniform;
    m.min_s = min_s;
    m.max_s = max_s;
    return m;
}

ArrivalModel ArrivalModel::scripted(std::vector<std::int64_t> slots) {
    ArrivalModel m;
    m.kind = Kind::Scripted;
    m.scripted_slots = std::move(slots);
    return m;
}

DelayModel DelayModel::deterministic(std::int64_t slots) {
    DelayModel m;
    m.kind = Kind::Deterministic;
    m.slots = slots;
    return m;
}

DelayModel DelayModel::stochastic(std::int64_t base_slots, double exp_rate) {
    DelayModel m;
    m.kind = Kind::Stochastic;
    m.base_slots = base_slots;
    m.exp_rate = exp_rate;
    return m;
}

void SimConfig::validate() const {
    if (!(slot_duration_s > 0.0))
        throw std::invalid_argument("sim config: slot duration must be positive");
    if (c_max < 1)
        throw std::invalid_argument("sim config: c_max must be at least 1");
    if (!(service_rate > 0.0))
        throw std::invalid_argument("sim config: service rate must be positive");
    if (!(task_size_min > 0.0) || task_size_min > task_size_max)
        throw std::invalid_argument("sim config: task size bounds invalid");
    switch (arrival.kind) {
    case ArrivalModel::Kind::Deterministic:
        if (!(arrival.interval_s > 0.0))
            throw std::invalid_argument("sim config: arrival interval must be positive");
        break;
    case ArrivalModel::Kind::Uniform:
        if (!(arrival.min_s > 0.0) || arrival.min_s > arrival.max_s)
            throw std::invalid_argument("sim config: uniform arrival bounds invalid");
        break;
    case ArrivalModel::Kind::Scripted:
        if (!std::is_sorted(arrival.scripted_slots.begin(), arrival.scripted_slots.end()))
            throw std::invalid_argument("sim config: scripted arrival slots must be ascending");
        if (!arrival.scripted_slots.empty() && arrival.scripted_slots.front() < 0)
            throw std::invalid_argument("sim config: scripted arrival slots must be non-negative");
        break;
    }
    switch (delay.kind) {
    case DelayModel::Kind::Deterministic:
        if (delay.slots < 0)
            throw std::invalid_argument("sim config: deterministic delay must be non-negative");
        break;
    case DelayModel::Kind::Stochastic:
        if (delay.base_slots < 0)
            throw std::invalid_argument("sim config: stochastic delay base must be non-negative");
        if (!(delay.exp_rate > 0.0))
            throw std::invalid_argument("sim config: stochastic delay rate must be positive");
        break;
    }
}

std::int64_t SimConfig::mean_processing_slots() const {
    const double mean_task = 0.5 * (task_size_min + task_size_max);
    return static_cast<std::int64_t>(std::ceil(mean_task / service_rate));
}

std::int64_t sample_delay_slots(const DelayModel& model, Rng& rng) {
    if (model.kind == DelayModel::Kind::Deterministic)
        return model.slots;
    return model.base_slots +
           static_cast<std::int64_t>(std::ceil(rng.exponential(model.exp_rate)));
}

std::int64_t sample_arrival_gap_slots(const ArrivalModel& model, double slot_duration_s, Rng& rng) {
    double gap_s = 0.0;
    switch (model.kind) {
    case ArrivalModel::Kind::Deterministic:
        gap_s = model.interval_s;
        break;
    case ArrivalModel::Kind::Uniform:
        gap_s = rng.uniform(model.min_s, model.max_s);
        break;
    case ArrivalModel::Kind::Scripted:
        throw std::logic_error("scripted arrivals have no gap distribution");
    }
    const std::int64_t slots = std::llround(gap_s / slot_duration_s);
    return std::max<std::int64_t>(1, slots);
}

namespace {

std::string format_seconds(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace

std::string to_string(const ArrivalModel& m) {
    switch (m.kind) {
    case ArrivalModel::Kind::Deterministic:
        return "det:" + format_seconds(m.interval_s);
    case ArrivalModel::Kind::Uniform:
        return "unif:" + format_seconds(m.min_s) + ":" + format_seconds(m.max_s);
    case ArrivalModel::Kind::Scripted:
        return "scripted";
    }
    return "?";
}

std::string to_string(const DelayModel& m) {
    if (m.kind == DelayModel::Kind::Deterministic)
        return "det:" + std::to_string(m.slots);
    return "stoch:" + std::to_string(m.base_slots) + ":" + format_seconds(m.exp_rate);
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("cannot parse ") + what + ": '" + s + "'");
    }
}

} // namespace

ArrivalModel parse_arrival_model(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts[0] == "det" && parts.size() == 2)
        return ArrivalModel::deterministic(parse_double(parts[1], "arrival interval"));
    if (parts[0] == "unif" && parts.size() == 3)
        return ArrivalModel::uniform(parse_double(parts[1], "arrival min"),
                                     parse_double(parts[2], "arrival max"));
    throw std::invalid_argument("arrival model must be det:<s> or unif:<min>:<max>, got '" + text + "'");
}

DelayModel parse_delay_model(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts[0] == "det" && parts.size() == 2)
        return DelayModel::deterministic(static_cast<std::int64_t>(parse_double(parts[1], "delay slots")));
    if (parts[0] == "stoch" && parts.size() == 3)
        return DelayModel::stochastic(static_cast<std::int64_t>(parse_double(parts[1], "delay base")),
                                      parse_double(parts[2], "delay rate"));
    throw std::invalid_argument("delay model must be det:<slots> or stoch:<base>:<rate>, got '" + text + "'");
}

} // namespace cfn
