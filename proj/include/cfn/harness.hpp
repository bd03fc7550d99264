#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cfn/env.hpp"
#include "cfn/metrics.hpp"
#include "cfn/policies.hpp"
#include "cfn/rl/ppo.hpp"
#include "cfn/sim_config.hpp"

namespace cfn::harness {

// Grid of experiment cells plus the shared training/evaluation settings.
struct ExperimentSpec {
    std::vector<int> c_max_values = {1, 2, 4};
    std::vector<ArrivalModel> arrivals = {
        ArrivalModel::deterministic(0.025),
        ArrivalModel::uniform(0.05, 0.075),
    };
    std::vector<RewardKind> reward_kinds = {RewardKind::Ava, RewardKind::Aoi,
                                            RewardKind::Aop, RewardKind::Qaoi};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    rl::TrainConfig train;
    double eval_duration_s = 100.0;
    SimConfig base_sim;       // arrival model and c_max are overridden per cell
    MetricConfig metric;
    double update_cost = 0.5;
    double age_norm = 100.0;
    bool include_heuristics = false;

    void validate() const;
};

// Laptop-friendly profile: reduced grid and a shortened training budget.
ExperimentSpec desk_profile();
// Full grid: every arrival setting, c_max 1..4, full training budget.
ExperimentSpec full_profile();

// Plain key/value experiment file, one `key = value` pair per line,
// '#' comments. Lists are comma separated.
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec load_spec_file(const std::string& path);

struct ResultRow {
    int c_max = 0;
    std::string arrival;
    std::string reward_kind; // trained reward kind or heuristic label
    std::uint64_t seed = 0;
    double update_rate_per_s = 0.0;
    std::optional<double> accuracy;
    double avg_aoi_slots = 0.0;
    double mean_return = 0.0;
    bool failed = false;
};

EnvConfig make_env_config(const ExperimentSpec& spec, int c_max,
                          const ArrivalModel& arrival, RewardKind kind);

// Fingerprint of the parts of an environment configuration a checkpoint
// depends on; stored in checkpoints and compared on load.
std::uint64_t env_config_hash(const EnvConfig& cfg);

// Trains one agent and writes `<tag>.ckpt` plus `<tag>_curve.csv` under
// out_dir. Returns the checkpoint path; empty when training diverged.
std::string run_train(const EnvConfig& env_cfg, const rl::TrainConfig& train_cfg,
                      std::uint64_t seed, const std::string& out_dir,
                      const std::string& tag);

// Greedy evaluation over eval_duration_s of simulated time.
ResultRow run_eval(Policy& policy, const EnvConfig& env_cfg, std::uint64_t seed,
                   double eval_duration_s, std::int64_t return_window_slots);

// Cartesian product of grid x reward kinds x seeds; executes cells across
// `jobs` worker threads and returns rows in deterministic cell order.
std::vector<ResultRow> run_sweep(const ExperimentSpec& spec, const std::string& out_dir,
                                 int jobs = 1, std::ostream* log = nullptr);

// results.csv with the fixed column order
// (c_max, arrival_model, reward_kind, seed, update_rate, accuracy, avg_aoi, mean_return).
void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);

// One file per (metric, arrival setting): rows are c_max values, columns the
// per-policy means across seeds.
void write_figure_aggregates(const ExperimentSpec& spec, const std::vector<ResultRow>& rows,
                             const std::string& out_dir);

// Newline-delimited JSON step/reset protocol over the given streams.
// Requests: {"cmd":"reset","seed":N} | {"cmd":"step","action":0|1} |
// {"cmd":"close"}. Responses carry "obs" (5 reals) and, for steps, "reward",
// "done" and an "info" record. Returns the number of requests served.
int env_serve(std::istream& in, std::ostream& out, const EnvConfig& cfg);

// Bundled demo scenario: capacity 3, 3-slot delays both ways, 20-slot tasks,
// scripted arrivals and update actions chosen to exercise every decision
// outcome. Used by the replay subcommand and the trace tests.
struct ReplayScript {
    SimConfig sim;
    std::vector<int> actions; // indexed by slot
    std::int64_t horizon = 0;
};

ReplayScript replay_script();

struct TraceRow {
    std::int64_t slot = 0;
    int c = 0;
    int c_hat = 0;
    int action = 0;
    int arrivals = 0;
    std::vector<Outcome> outcomes;
};

// Runs the scripted scenario; optionally emits one JSON object per slot.
std::vector<TraceRow> run_replay(const ReplayScript& script, std::ostream* trace_jsonl = nullptr);

} // namespace cfn::harness
