#include "cfn/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cfn/rl/checkpoint.hpp"

namespace cfn::harness {

namespace {

std::string format_num(double v, int precision = 10) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string current;
    std::stringstream ss(text);
    while (std::getline(ss, current, ','))
        if (const std::string t = trim(current); !t.empty())
            items.push_back(t);
    return items;
}

} // namespace

void ExperimentSpec::validate() const {
    if (c_max_values.empty() || arrivals.empty() || reward_kinds.empty())
        throw std::invalid_argument("experiment spec: grid must be non-empty");
    if (seeds.empty())
        throw std::invalid_argument("experiment spec: seed list must be non-empty");
    if (!(eval_duration_s > 0.0))
        throw std::invalid_argument("experiment spec: evaluation duration must be positive");
    for (int c : c_max_values)
        if (c < 1)
            throw std::invalid_argument("experiment spec: c_max values must be at least 1");
    train.validate();
    metric.validate();
    SimConfig probe = base_sim;
    for (const auto& arrival : arrivals) {
        probe.arrival = arrival;
        probe.validate();
    }
}

ExperimentSpec desk_profile() {
    ExperimentSpec spec;
    spec.train.total_steps = 100000;
    return spec;
}

ExperimentSpec full_profile() {
    ExperimentSpec spec;
    spec.c_max_values = {1, 2, 3, 4};
    spec.arrivals.clear();
    const double intervals[] = {0.0167, 0.02, 0.025, 0.0333, 0.05, 0.1};
    for (double s : intervals)
        spec.arrivals.push_back(ArrivalModel::deterministic(s));
    for (double s : intervals)
        spec.arrivals.push_back(ArrivalModel::uniform(s, 1.5 * s));
    spec.train.total_steps = 500000;
    return spec;
}

ExperimentSpec parse_spec(std::istream& in) {
    ExperimentSpec spec = desk_profile();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("spec line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "c_max") {
                spec.c_max_values.clear();
                for (const auto& item : split_list(value))
                    spec.c_max_values.push_back(std::stoi(item));
            } else if (key == "arrivals") {
                spec.arrivals.clear();
                for (const auto& item : split_list(value))
                    spec.arrivals.push_back(parse_arrival_model(item));
            } else if (key == "rewards") {
                spec.reward_kinds.clear();
                for (const auto& item : split_list(value))
                    spec.reward_kinds.push_back(parse_reward_kind(item));
            } else if (key == "seeds") {
                spec.seeds.clear();
                for (const auto& item : split_list(value))
                    spec.seeds.push_back(std::stoull(item));
            } else if (key == "total_steps") {
                spec.train.total_steps = std::stoll(value);
            } else if (key == "episode_len") {
                spec.train.episode_len = std::stoll(value);
            } else if (key == "minibatch") {
                spec.train.minibatch_size = std::stoll(value);
            } else if (key == "learning_rate") {
                spec.train.learning_rate = std::stod(value);
            } else if (key == "discount") {
                spec.train.discount = std::stod(value);
            } else if (key == "entropy_coef") {
                spec.train.entropy_coef = std::stod(value);
            } else if (key == "eval_duration_s") {
                spec.eval_duration_s = std::stod(value);
            } else if (key == "slot_duration_s") {
                spec.base_sim.slot_duration_s = std::stod(value);
            } else if (key == "service_rate") {
                spec.base_sim.service_rate = std::stod(value);
            } else if (key == "task_size_min") {
                spec.base_sim.task_size_min = std::stod(value);
            } else if (key == "task_size_max") {
                spec.base_sim.task_size_max = std::stod(value);
            } else if (key == "delay") {
                spec.base_sim.delay = parse_delay_model(value);
            } else if (key == "update_cost") {
                spec.update_cost = std::stod(value);
            } else if (key == "epsilon") {
                spec.metric.epsilon = std::stod(value);
            } else if (key == "k") {
                spec.metric.k = std::stod(value);
            } else if (key == "qaoi_hold") {
                spec.metric.qaoi_hold = value == "true" || value == "1";
            } else if (key == "age_norm") {
                spec.age_norm = std::stod(value);
            } else if (key == "include_heuristics") {
                spec.include_heuristics = value == "true" || value == "1";
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception& e) {
            throw std::invalid_argument("spec line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open experiment file: " + path);
    return parse_spec(in);
}

EnvConfig make_env_config(const ExperimentSpec& spec, int c_max,
                          const ArrivalModel& arrival, RewardKind kind) {
    EnvConfig cfg;
    cfg.sim = spec.base_sim;
    cfg.sim.c_max = c_max;
    cfg.sim.arrival = arrival;
    cfg.metric = spec.metric;
    cfg.reward_kind = kind;
    cfg.update_cost = spec.update_cost;
    cfg.episode_len = spec.train.episode_len;
    cfg.age_norm = spec.age_norm;
    return cfg;
}

namespace {

std::string describe_env(const EnvConfig& cfg) {
    std::ostringstream oss;
    oss << "c_max=" << cfg.sim.c_max << ";arrival=" << to_string(cfg.sim.arrival)
        << ";delay=" << to_string(cfg.sim.delay) << ";reward=" << to_string(cfg.reward_kind)
        << ";cost=" << format_num(cfg.update_cost) << ";k=" << format_num(cfg.metric.k)
        << ";eps=" << format_num(cfg.metric.epsilon);
    return oss.str();
}

} // namespace

std::uint64_t env_config_hash(const EnvConfig& cfg) {
    return rl::fnv1a_hash(describe_env(cfg));
}

namespace {

// Bridges the simulator environment to the trainer's normalized-vector view.
class EnvAdapter : public rl::RolloutEnv {
public:
    explicit EnvAdapter(Environment& env)
        : env_(env), c_max_(env.config().sim.c_max) {}

    std::array<double, 5> reset(std::uint64_t seed) override {
        return observe_normalized(env_.reset(seed), c_max_);
    }

    rl::StepOut step(int action) override {
        const StepResult r = env_.step(action);
        return {observe_normalized(r.observation, c_max_), r.reward, r.done};
    }

private:
    Environment& env_;
    int c_max_;
};

} // namespace

std::string run_train(const EnvConfig& env_cfg, const rl::TrainConfig& train_cfg,
                      std::uint64_t seed, const std::string& out_dir,
                      const std::string& tag) {
    std::filesystem::create_directories(out_dir);
    Environment env(env_cfg);
    EnvAdapter adapter(env);
    const std::uint64_t hash = env_config_hash(env_cfg);
    const rl::TrainResult result = rl::train(adapter, train_cfg, seed, out_dir, hash);
    rl::write_learning_curve_csv(result.curve, out_dir + "/" + tag + "_curve.csv");
    if (result.diverged)
        return "";
    const std::string path = out_dir + "/" + tag + ".ckpt";
    rl::save_checkpoint(result.net, hash, path);
    return path;
}

ResultRow run_eval(Policy& policy, const EnvConfig& env_cfg, std::uint64_t seed,
                   double eval_duration_s, std::int64_t return_window_slots) {
    EnvConfig cfg = env_cfg;
    const auto slots = static_cast<std::int64_t>(
        std::llround(eval_duration_s / cfg.sim.slot_duration_s));
    if (slots < 1)
        throw std::invalid_argument("evaluation horizon shorter than one slot");
    cfg.episode_len = slots;

    Environment env(cfg);
    Observation obs = env.reset(seed);
    RunMetrics metrics;
    double total_reward = 0.0;
    for (std::int64_t t = 0; t < slots; ++t) {
        const int action = policy.act(obs);
        const StepResult r = env.step(action);
        ++metrics.total_slots;
        if (r.info.update_dispatched)
            ++metrics.total_updates;
        for (Outcome o : r.info.decision_outcomes)
            metrics.record_outcome(o);
        const WorldState& w = env.simulator().state();
        metrics.aoi_sum += w.aoi.aoi(w.slot);
        total_reward += r.reward;
        obs = r.observation;
    }
    const RunSummary summary = finalize(metrics, cfg.sim.slot_duration_s);

    ResultRow row;
    row.c_max = cfg.sim.c_max;
    row.arrival = to_string(cfg.sim.arrival);
    row.reward_kind = policy.kind() == Policy::Kind::Learned ? to_string(cfg.reward_kind)
                                                             : policy.label();
    row.seed = seed;
    row.update_rate_per_s = summary.update_rate_per_s;
    row.accuracy = summary.accuracy;
    row.avg_aoi_slots = summary.avg_aoi_slots;
    row.mean_return = total_reward * static_cast<double>(return_window_slots) /
                      static_cast<double>(slots);
    return row;
}

namespace {

struct Cell {
    int c_max = 0;
    ArrivalModel arrival;
    bool heuristic = false;
    RewardKind kind = RewardKind::Ava;
    std::string heuristic_name;
    std::uint64_t seed = 0;
};

ResultRow run_cell(const ExperimentSpec& spec, const Cell& cell, const std::string& out_dir) {
    // Heuristic rows are scored under the ava reward so their mean_return
    // column stays comparable with the headline agent.
    const RewardKind env_kind = cell.heuristic ? RewardKind::Ava : cell.kind;
    const EnvConfig env_cfg = make_env_config(spec, cell.c_max, cell.arrival, env_kind);

    if (cell.heuristic) {
        Policy policy = cell.heuristic_name == "always" ? Policy::always() : Policy::never();
        ResultRow row = run_eval(policy, env_cfg, cell.seed, spec.eval_duration_s,
                                 spec.train.episode_len);
        row.reward_kind = cell.heuristic_name;
        return row;
    }

    std::string tag = "cmax" + std::to_string(cell.c_max) + "_" + to_string(cell.arrival) +
                      "_" + to_string(cell.kind) + "_seed" + std::to_string(cell.seed);
    for (char& ch : tag)
        if (ch == ':' || ch == '.')
            ch = ch == ':' ? '_' : 'p';
    const std::string ckpt = run_train(env_cfg, spec.train, cell.seed, out_dir, tag);
    if (ckpt.empty()) {
        ResultRow row;
        row.c_max = cell.c_max;
        row.arrival = to_string(cell.arrival);
        row.reward_kind = to_string(cell.kind);
        row.seed = cell.seed;
        row.failed = true;
        return row;
    }
    Policy policy = Policy::learned(rl::load_checkpoint(ckpt).net, cell.c_max);
    return run_eval(policy, env_cfg, cell.seed, spec.eval_duration_s, spec.train.episode_len);
}

} // namespace

std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, const std::string& out_dir,
                                 int jobs, std::ostream* log) {
    spec.validate();
    std::filesystem::create_directories(out_dir);

    std::vector<Cell> cells;
    for (int c_max : spec.c_max_values) {
        for (const auto& arrival : spec.arrivals) {
            for (RewardKind kind : spec.reward_kinds)
                for (std::uint64_t seed : spec.seeds)
                    cells.push_back({c_max, arrival, false, kind, "", seed});
            if (spec.include_heuristics)
                for (const char* name : {"never", "always"})
                    for (std::uint64_t seed : spec.seeds)
                        cells.push_back({c_max, arrival, true, RewardKind::Ava, name, seed});
        }
    }

    std::vector<ResultRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size())
                return;
            rows[i] = run_cell(spec, cells[i], out_dir);
            if (log) {
                std::lock_guard<std::mutex> lock(log_mutex);
                *log << "cell " << (i + 1) << "/" << cells.size() << ": c_max=" << rows[i].c_max
                     << " arrival=" << rows[i].arrival << " policy=" << rows[i].reward_kind
                     << " seed=" << rows[i].seed
                     << (rows[i].failed ? " FAILED" : "") << "\n";
            }
        }
    };

    const int n_workers = std::max(1, jobs);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    return rows;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    out << "c_max,arrival_model,reward_kind,seed,update_rate,accuracy,avg_aoi,mean_return\n";
    for (const auto& r : rows) {
        out << r.c_max << ',' << r.arrival << ',' << r.reward_kind << ',' << r.seed << ',';
        if (r.failed) {
            out << ",,,\n";
            continue;
        }
        out << format_num(r.update_rate_per_s) << ','
            << (r.accuracy ? format_num(*r.accuracy) : std::string()) << ','
            << format_num(r.avg_aoi_slots) << ',' << format_num(r.mean_return) << '\n';
    }
}

namespace {

std::string file_safe(std::string s) {
    for (char& ch : s)
        if (ch == ':')
            ch = '_';
    return s;
}

} // namespace

void write_figure_aggregates(const ExperimentSpec& spec, const std::vector<ResultRow>& rows,
                             const std::string& out_dir) {
    std::vector<std::string> policies;
    for (RewardKind kind : spec.reward_kinds)
        policies.emplace_back(to_string(kind));
    if (spec.include_heuristics) {
        policies.emplace_back("never");
        policies.emplace_back("always");
    }

    struct Acc {
        double sum = 0.0;
        int n = 0;
    };
    // metric -> (arrival, c_max, policy) -> mean across seeds
    const char* metric_names[] = {"update_rate", "accuracy", "avg_aoi"};
    for (int metric = 0; metric < 3; ++metric) {
        std::map<std::string, std::map<std::pair<int, std::string>, Acc>> grid;
        for (const auto& r : rows) {
            if (r.failed)
                continue;
            double value = 0.0;
            if (metric == 0)
                value = r.update_rate_per_s;
            else if (metric == 1) {
                if (!r.accuracy)
                    continue;
                value = *r.accuracy;
            } else {
                value = r.avg_aoi_slots;
            }
            auto& acc = grid[r.arrival][{r.c_max, r.reward_kind}];
            acc.sum += value;
            ++acc.n;
        }
        for (const auto& arrival : spec.arrivals) {
            const std::string label = to_string(arrival);
            const std::string path = out_dir + "/fig_" + std::string(metric_names[metric]) +
                                     "_" + file_safe(label) + ".csv";
            std::ofstream out(path);
            if (!out)
                throw std::runtime_error("cannot write aggregate file: " + path);
            out << "c_max";
            for (const auto& p : policies)
                out << ',' << p;
            out << '\n';
            for (int c_max : spec.c_max_values) {
                out << c_max;
                for (const auto& p : policies) {
                    out << ',';
                    const auto it = grid[label].find({c_max, p});
                    if (it != grid[label].end() && it->second.n > 0)
                        out << format_num(it->second.sum / it->second.n);
                }
                out << '\n';
            }
        }
    }
}

int env_serve(std::istream& in, std::ostream& out, const EnvConfig& cfg) {
    using nlohmann::json;
    Environment env(cfg);
    bool ready = false;
    int served = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        ++served;
        json response;
        try {
            const json request = json::parse(line);
            const std::string cmd = request.at("cmd").get<std::string>();
            if (cmd == "reset") {
                const auto seed = request.value("seed", cfg.sim.rng_seed);
                const Observation obs = env.reset(seed);
                response["obs"] = observe_normalized(obs, cfg.sim.c_max);
                ready = true;
            } else if (cmd == "step") {
                if (!ready)
                    throw std::logic_error("step before reset");
                const int action = request.at("action").get<int>();
                if (action != 0 && action != 1)
                    throw std::invalid_argument("action must be 0 or 1");
                const StepResult r = env.step(action);
                response["obs"] = observe_normalized(r.observation, cfg.sim.c_max);
                response["reward"] = r.reward;
                response["done"] = r.done;
                json info;
                info["arrivals"] = r.info.arrivals_at_ap;
                info["update_delivered"] = r.info.update_delivered;
                info["update_dispatched"] = r.info.update_dispatched;
                info["tasks_completed"] = r.info.tasks_completed;
                info["tasks_dropped"] = r.info.tasks_dropped;
                json outcomes = json::array();
                for (Outcome o : r.info.decision_outcomes)
                    outcomes.push_back(to_string(o));
                info["outcomes"] = outcomes;
                response["info"] = info;
            } else if (cmd == "close") {
                out << json{{"ok", true}}.dump() << "\n";
                break;
            } else {
                throw std::invalid_argument("unknown cmd '" + cmd + "'");
            }
        } catch (const std::exception& e) {
            response = json{{"error", e.what()}};
        }
        out << response.dump() << "\n";
        out.flush();
    }
    return served;
}

ReplayScript replay_script() {
    ReplayScript script;
    script.sim.slot_duration_s = 0.001;
    script.sim.c_max = 3;
    script.sim.service_rate = 2.0;
    script.sim.task_size_min = 40.0; // exactly 20 slots per task
    script.sim.task_size_max = 40.0;
    script.sim.delay = DelayModel::deterministic(3);
    script.sim.arrival = ArrivalModel::scripted({5, 10, 15, 20, 40, 60, 80});
    script.sim.rng_seed = 7;
    script.horizon = 90;
    script.actions.assign(static_cast<std::size_t>(script.horizon), 0);
    for (std::int64_t slot : {25, 26, 55, 81})
        script.actions[static_cast<std::size_t>(slot)] = 1;
    return script;
}

std::vector<TraceRow> run_replay(const ReplayScript& script, std::ostream* trace_jsonl) {
    Simulator sim(script.sim);
    std::vector<TraceRow> trace;
    trace.reserve(static_cast<std::size_t>(script.horizon));
    for (std::int64_t t = 0; t < script.horizon; ++t) {
        const int action =
            t < static_cast<std::int64_t>(script.actions.size()) ? script.actions[static_cast<std::size_t>(t)] : 0;
        TraceRow row;
        row.slot = t;
        row.c = sim.state().c;
        row.c_hat = sim.state().c_hat;
        row.action = action;
        const SlotReport report = sim.step(action);
        row.arrivals = report.arrivals_at_ap;
        row.outcomes = report.decision_outcomes;
        if (trace_jsonl) {
            nlohmann::json j;
            j["slot"] = row.slot;
            j["c"] = row.c;
            j["c_hat"] = row.c_hat;
            j["action"] = row.action;
            j["arrivals"] = row.arrivals;
            nlohmann::json outcomes = nlohmann::json::array();
            for (Outcome o : row.outcomes)
                outcomes.push_back(to_string(o));
            j["outcomes"] = outcomes;
            *trace_jsonl << j.dump() << "\n";
        }
        trace.push_back(std::move(row));
    }
    return trace;
}

} // namespace cfn::harness
