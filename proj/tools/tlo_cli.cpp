#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tlo/config.hpp"
#include "tlo/errors.hpp"
#include "tlo/experiment.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kAbortExit = 3;

int run(const std::string& name, const std::string& config_file, const std::string& seeds, const std::string& out,
        std::optional<std::size_t> workers) {
    tlo::ExperimentConfig cfg = tlo::default_config(tlo::experiment_kind_from_string(name));
    if (!config_file.empty()) tlo::apply_config_file(cfg, config_file);
    if (!seeds.empty()) cfg.seeds = tlo::parse_seed_list(seeds);
    if (!out.empty()) cfg.out_dir = out;
    const std::size_t n = workers.value_or(tlo::worker_count());
    const tlo::ExperimentReport rep = tlo::run_experiment(cfg, n);
    for (const auto& s : rep.seeds) {
        if (!s.error.empty()) {
            fmt::print(stderr, "{}\n", s.error);
            continue;
        }
        std::string extra;
        for (const auto& [k, v] : s.metrics) extra += fmt::format(" {}={:.4g}", k, v);
        fmt::print("seed {:>3}  success {:.3f}{}\n", s.seed, s.success_rate, extra);
    }
    fmt::print("{}: {}/{} seeds with success >= 0.9; summary in {}\n", tlo::to_string(rep.kind),
               rep.count_at_least(0.9), rep.seeds.size(), (cfg.out_dir / "summary.csv").string());
    return rep.failed > 0 ? kAbortExit : 0;
}

struct EvalArgs {
    std::string policy;
    std::string env;
    std::string scheme = "endpoint";
    std::vector<double> thresholds;
    std::optional<double> last_level;
    bool require_terminal = false;
    std::size_t episodes = 100;
    std::uint64_t seed = 0;
    std::size_t horizon = tlo::kDefaultHorizon;
    double gamma = 0.99;
};

int eval(const EvalArgs& a) {
    tlo::MazeSettings ms;
    ms.source = a.env;
    ms.scheme = tlo::objective_scheme_from_string(a.scheme);
    ms.gamma = a.gamma;
    const tlo::TabularMomdp env = tlo::load_maze_env(ms);
    tlo::SuccessCriterion crit;
    crit.thresholds = a.thresholds.empty()
                          ? tlo::ThresholdVector(std::vector<double>(env.num_objectives() - 1,
                                                                     -std::numeric_limits<double>::infinity()))
                          : tlo::ThresholdVector(a.thresholds);
    if (a.last_level) {
        crit.include_last = true;
        crit.last_level = *a.last_level;
    }
    crit.require_terminal = a.require_terminal;
    const tlo::PolicyEval ev = tlo::evaluate_policy_file(a.policy, env, crit, a.episodes, a.seed, a.horizon);
    fmt::print("# eval v1\nseed,success_rate,goal_rate");
    for (Eigen::Index i = 0; i < ev.mean_return.size(); ++i) fmt::print(",mean_return_{}", i + 1);
    fmt::print("\n{},{:.17g},{:.17g}", a.seed, ev.success_rate, ev.goal_rate);
    for (Eigen::Index i = 0; i < ev.mean_return.size(); ++i) fmt::print(",{:.17g}", ev.mean_return[i]);
    fmt::print("\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thresholded lexicographic RL experiments"};
    app.require_subcommand(1);

    std::string name, config_file, seeds, out;
    std::optional<std::size_t> workers;
    auto* run_cmd = app.add_subcommand("run", "Run a named experiment over a list of seeds");
    run_cmd->add_option("--experiment", name, "lpa-benchmark, tlq-train, tlq-failure-scan, reinforce-path, "
                                              "reinforce-endpoint, ftn or augment-demo")
        ->required();
    run_cmd->add_option("--config", config_file, "INI file overriding the experiment defaults")->check(CLI::ExistingFile);
    run_cmd->add_option("--seeds", seeds, "Seed range such as 0..9, or a comma list");
    run_cmd->add_option("--out", out, "Output directory");
    run_cmd->add_option("--workers", workers, "Worker threads (default: TLO_WORKERS or core count)")
        ->check(CLI::PositiveNumber);

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved policy on a maze");
    eval_cmd->add_option("--policy", ea.policy, "Policy file written by a run")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--env", ea.env, "Maze file or built-in maze name")->required();
    eval_cmd->add_option("--scheme", ea.scheme, "Objective layout: endpoint or path")->capture_default_str();
    eval_cmd->add_option("--thresholds", ea.thresholds, "Thresholds for the constrained objectives")->delimiter(',');
    eval_cmd->add_option("--last-level", ea.last_level, "Also require the last objective to reach this level");
    eval_cmd->add_flag("--require-terminal", ea.require_terminal, "Count only episodes that reach the goal");
    eval_cmd->add_option("--episodes", ea.episodes, "Evaluation episodes")->capture_default_str();
    eval_cmd->add_option("--seed", ea.seed, "Evaluation seed")->capture_default_str();
    eval_cmd->add_option("--horizon", ea.horizon, "Episode step limit")->capture_default_str();
    eval_cmd->add_option("--gamma", ea.gamma, "Discount of the maze env")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigExit;
    }

    try {
        if (run_cmd->parsed()) return run(name, config_file, seeds, out, workers);
        return eval(ea);
    } catch (const tlo::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfigExit;
    } catch (const tlo::ParseError& e) {
        fmt::print(stderr, "parse error: {}\n", e.what());
        return kConfigExit;
    } catch (const tlo::ContractError& e) {
        fmt::print(stderr, "invalid configuration: {}\n", e.what());
        return kConfigExit;
    } catch (const tlo::UnsupportedConfiguration& e) {
        fmt::print(stderr, "unsupported configuration: {}\n", e.what());
        return kConfigExit;
    } catch (const std::exception& e) {
        fmt::print(stderr, "aborted: {}\n", e.what());
        return kAbortExit;
    }
}
