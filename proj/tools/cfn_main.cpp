// Command line front end: train / eval / sweep / replay / env-serve.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cfn/harness.hpp"
#include "cfn/rl/checkpoint.hpp"

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("CFN_OUT_DIR"); env && *env)
        return env;
    return "out";
}

struct CellOptions {
    int c_max = 4;
    std::string arrival = "det:0.025";
    std::string delay = "stoch:4:1";
    std::string reward = "ava";
    double slot_duration_s = 0.001;
    double service_rate = 2.0;
    double task_size_min = 40.0;
    double task_size_max = 45.0;
    double update_cost = 0.5;
    double k = 0.02;
    double epsilon = 0.01;
    bool qaoi_hold = false;
    double age_norm = 100.0;
    std::int64_t episode_len = 2000;

    void add_flags(CLI::App& app) {
        app.add_option("--c-max", c_max, "maximum concurrent server threads");
        app.add_option("--arrival", arrival, "arrival model, det:<s> or unif:<min>:<max>");
        app.add_option("--delay", delay, "delay model, det:<slots> or stoch:<base>:<rate>");
        app.add_option("--reward", reward, "reward kind: ava|aoi|aop|qaoi");
        app.add_option("--slot", slot_duration_s, "slot duration in seconds");
        app.add_option("--service-rate", service_rate, "work units per thread per slot");
        app.add_option("--task-min", task_size_min, "minimum task size, work units");
        app.add_option("--task-max", task_size_max, "maximum task size, work units");
        app.add_option("--update-cost", update_cost, "cost charged per dispatched update");
        app.add_option("--k", k, "query-age decay constant");
        app.add_option("--epsilon", epsilon, "consistency epsilon");
        app.add_flag("--qaoi-hold", qaoi_hold, "hold the query age between arrivals");
        app.add_option("--age-norm", age_norm, "scale for age-based baseline rewards");
        app.add_option("--episode-len", episode_len, "episode length in slots");
    }

    cfn::EnvConfig env_config() const {
        cfn::EnvConfig cfg;
        cfg.sim.slot_duration_s = slot_duration_s;
        cfg.sim.c_max = c_max;
        cfg.sim.service_rate = service_rate;
        cfg.sim.task_size_min = task_size_min;
        cfg.sim.task_size_max = task_size_max;
        cfg.sim.arrival = cfn::parse_arrival_model(arrival);
        cfg.sim.delay = cfn::parse_delay_model(delay);
        cfg.metric.k = k;
        cfg.metric.epsilon = epsilon;
        cfg.metric.qaoi_hold = qaoi_hold;
        cfg.reward_kind = cfn::parse_reward_kind(reward);
        cfg.update_cost = update_cost;
        cfg.episode_len = episode_len;
        cfg.age_norm = age_norm;
        return cfg;
    }
};

cfn::Policy make_policy(const std::string& text, const cfn::EnvConfig& cfg) {
    if (text == "never")
        return cfn::Policy::never();
    if (text == "always")
        return cfn::Policy::always();
    if (text.rfind("periodic:", 0) == 0)
        return cfn::Policy::periodic(std::stoll(text.substr(9)));
    if (text.rfind("greedy:", 0) == 0)
        return cfn::Policy::greedy_threshold(std::stod(text.substr(7)), cfg.metric);
    if (text.rfind("ckpt:", 0) == 0) {
        const auto loaded = cfn::rl::load_checkpoint(text.substr(5));
        if (loaded.config_hash != cfn::harness::env_config_hash(cfg))
            std::cerr << "warning: checkpoint was trained under a different"
                         " configuration than the one being evaluated\n";
        return cfn::Policy::learned(loaded.net, cfg.sim.c_max);
    }
    throw std::invalid_argument(
        "policy must be never|always|periodic:<p>|greedy:<theta>|ckpt:<path>, got '" + text + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slotted status-refresh simulator and update-policy trainer"};
    app.require_subcommand(1);

    std::string out_dir = default_out_dir();
    app.add_option("--out", out_dir, "output directory (default $CFN_OUT_DIR or ./out)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train one update agent");
    CellOptions train_cell;
    train_cell.add_flags(*train_cmd);
    std::uint64_t train_seed = 1;
    std::int64_t total_steps = 100000;
    std::string train_tag = "agent";
    train_cmd->add_option("--seed", train_seed, "training seed");
    train_cmd->add_option("--total-steps", total_steps, "environment steps to train for");
    train_cmd->add_option("--tag", train_tag, "basename for checkpoint and curve files");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a policy greedily");
    CellOptions eval_cell;
    eval_cell.add_flags(*eval_cmd);
    std::string eval_policy = "never";
    std::uint64_t eval_seed = 1;
    double eval_duration = 100.0;
    eval_cmd->add_option("--policy", eval_policy,
                         "never|always|periodic:<p>|greedy:<theta>|ckpt:<path>");
    eval_cmd->add_option("--seed", eval_seed, "evaluation seed");
    eval_cmd->add_option("--duration", eval_duration, "evaluated time in seconds");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run the experiment grid");
    std::string sweep_config;
    bool sweep_full = false;
    bool sweep_heuristics = false;
    int jobs = 1;
    sweep_cmd->add_option("--config", sweep_config, "experiment file (key = value lines)");
    sweep_cmd->add_flag("--full", sweep_full, "full grid and training budget");
    sweep_cmd->add_flag("--heuristics", sweep_heuristics, "also evaluate never/always rows");
    sweep_cmd->add_option("--jobs", jobs, "worker threads for grid cells");

    // replay
    auto* replay_cmd = app.add_subcommand("replay", "run the bundled demo scenario");
    std::string trace_path;
    replay_cmd->add_option("--trace", trace_path, "write a JSON-lines trace to this file");

    // env-serve
    auto* serve_cmd = app.add_subcommand("env-serve", "serve the env over stdin/stdout JSON");
    CellOptions serve_cell;
    serve_cell.add_flags(*serve_cmd);
    std::uint64_t serve_seed = 1;
    serve_cmd->add_option("--seed", serve_seed, "default seed for reset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            cfn::EnvConfig cfg = train_cell.env_config();
            cfn::rl::TrainConfig tc;
            tc.total_steps = total_steps;
            tc.episode_len = train_cell.episode_len;
            const std::string path =
                cfn::harness::run_train(cfg, tc, train_seed, out_dir, train_tag);
            if (path.empty()) {
                std::cerr << "training diverged; no checkpoint written\n";
                return 1;
            }
            std::cout << "checkpoint: " << path << "\n"
                      << "curve: " << out_dir << "/" << train_tag << "_curve.csv\n";
            return 0;
        }
        if (*eval_cmd) {
            cfn::EnvConfig cfg = eval_cell.env_config();
            cfn::Policy policy = make_policy(eval_policy, cfg);
            const auto row = cfn::harness::run_eval(policy, cfg, eval_seed, eval_duration,
                                                    eval_cell.episode_len);
            std::cout << "policy: " << eval_policy << "\n"
                      << "update_rate_per_s: " << row.update_rate_per_s << "\n"
                      << "accuracy: ";
            if (row.accuracy)
                std::cout << *row.accuracy;
            else
                std::cout << "n/a (no requests)";
            std::cout << "\navg_aoi_slots: " << row.avg_aoi_slots << "\n"
                      << "mean_return: " << row.mean_return << "\n";
            return 0;
        }
        if (*sweep_cmd) {
            cfn::harness::ExperimentSpec spec =
                !sweep_config.empty() ? cfn::harness::load_spec_file(sweep_config)
                : sweep_full         ? cfn::harness::full_profile()
                                     : cfn::harness::desk_profile();
            if (sweep_heuristics)
                spec.include_heuristics = true;
            const auto rows = cfn::harness::run_sweep(spec, out_dir, jobs, &std::cerr);
            std::filesystem::create_directories(out_dir);
            std::ofstream csv(out_dir + "/results.csv");
            cfn::harness::write_results_csv(rows, csv);
            cfn::harness::write_figure_aggregates(spec, rows, out_dir);
            std::size_t failed = 0;
            for (const auto& r : rows)
                failed += r.failed ? 1 : 0;
            std::cout << "wrote " << rows.size() << " rows to " << out_dir << "/results.csv";
            if (failed > 0)
                std::cout << " (" << failed << " failed)";
            std::cout << "\n";
            return failed == 0 ? 0 : 1;
        }
        if (*replay_cmd) {
            const auto script = cfn::harness::replay_script();
            std::ofstream trace_file;
            std::ostream* trace = nullptr;
            if (!trace_path.empty()) {
                trace_file.open(trace_path);
                if (!trace_file) {
                    std::cerr << "cannot open trace file " << trace_path << "\n";
                    return 1;
                }
                trace = &trace_file;
            }
            const auto rows = cfn::harness::run_replay(script, trace);
            std::cout << "slot c c_hat action arrivals outcome\n";
            for (const auto& row : rows) {
                std::cout << row.slot << ' ' << row.c << ' ' << row.c_hat << ' ' << row.action
                          << ' ' << row.arrivals;
                for (auto o : row.outcomes)
                    std::cout << ' ' << cfn::to_string(o);
                std::cout << '\n';
            }
            return 0;
        }
        if (*serve_cmd) {
            cfn::EnvConfig cfg = serve_cell.env_config();
            cfg.sim.rng_seed = serve_seed;
            cfn::harness::env_serve(std::cin, std::cout, cfg);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
