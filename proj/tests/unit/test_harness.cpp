#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <doctest.h>
#include <fmt/format.h>

#include "tlo/config.hpp"
#include "tlo/errors.hpp"
#include "tlo/experiment.hpp"

using namespace tlo;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "tlo-unit" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int cli(const std::string& args) {
    const std::string cmd = std::string(TLO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_path_config(const fs::path& out) {
    ExperimentConfig cfg = default_config(ExperimentKind::ReinforcePath);
    cfg.reinforce.episodes = 40;
    cfg.reinforce.hidden = 16;
    cfg.reinforce.eval_episodes = 20;
    cfg.seeds = {0, 1, 2};
    cfg.out_dir = out;
    return cfg;
}

}  // namespace

TEST_CASE("seed lists") {
    CHECK(parse_seed_list("0..3") == std::vector<std::uint64_t>{0, 1, 2, 3});
    CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
    CHECK(parse_seed_list("0,2,5") == std::vector<std::uint64_t>{0, 2, 5});
    CHECK_THROWS_AS(parse_seed_list("a..b"), ConfigError);
    CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
}

TEST_CASE("experiment names round trip") {
    for (auto k : {ExperimentKind::LpaBenchmark, ExperimentKind::TlqTrain, ExperimentKind::TlqFailureScan,
                   ExperimentKind::ReinforcePath, ExperimentKind::ReinforceEndpoint, ExperimentKind::Ftn,
                   ExperimentKind::AugmentDemo})
        CHECK(experiment_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(experiment_kind_from_string("nope"), ConfigError);
}

TEST_CASE("config files override defaults and reject typos") {
    ExperimentConfig cfg = default_config(ExperimentKind::ReinforcePath);
    std::istringstream ini("[experiment]\nseeds = 1..2\n[reinforce]\nlearning_rate = 0.05\nepisodes = 10\n"
                           "delta_deg = 30\n[maze]\nsource = maze-small\n");
    apply_config(cfg, ini);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(cfg.reinforce.adam.learning_rate == 0.05);
    CHECK(cfg.reinforce.episodes == 10);
    CHECK(cfg.reinforce.direction.delta == doctest::Approx(30 * 3.14159265358979 / 180));
    CHECK(cfg.maze.source == "maze-small");

    std::istringstream typo("[reinforce]\nlearning_rat = 0.05\n");
    CHECK_THROWS_AS(apply_config(cfg, typo), ConfigError);
    std::istringstream section("[reinforcement]\nepisodes = 1\n");
    CHECK_THROWS_AS(apply_config(cfg, section), ConfigError);
    std::istringstream value("[reinforce]\nepisodes = many\n");
    CHECK_THROWS_AS(apply_config(cfg, value), ConfigError);
    std::istringstream other("[experiment]\nname = ftn\n");
    CHECK_THROWS_AS(apply_config(cfg, other), ConfigError);
}

TEST_CASE("maze sources resolve from names and files") {
    const fs::path dir = fresh_dir("maze");
    std::ofstream(dir / "m.txt") << "|G_|__|\n|S_|HH|\n";
    MazeSettings ms;
    ms.source = (dir / "m.txt").string();
    CHECK(load_maze_spec(ms).width == 2);
    ms.source = "maze-small";
    CHECK(load_maze_spec(ms).height == 3);
    ms.source = (dir / "missing.txt").string();
    CHECK_THROWS_AS(load_maze_spec(ms), ConfigError);
}

TEST_CASE("worker count honours the environment") {
    ::setenv("TLO_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    ::setenv("TLO_WORKERS", "zero", 1);
    CHECK_THROWS_AS(worker_count(), ConfigError);
    ::unsetenv("TLO_WORKERS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("outputs are bit-identical for identical config and seeds") {
    const fs::path a = fresh_dir("same-a"), b = fresh_dir("same-b");
    run_experiment(small_path_config(a), 2);
    run_experiment(small_path_config(b), 1);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
        ++files;
    }
    CHECK(files == 7);
}

TEST_CASE("summary agrees with the per-seed artefacts") {
    const fs::path dir = fresh_dir("summary");
    const ExperimentConfig cfg = small_path_config(dir);
    const ExperimentReport rep = run_experiment(cfg, 2);
    std::ifstream in(dir / "summary.csv");
    const ExperimentReport back = read_summary_csv(in, cfg.kind);
    REQUIRE(back.seeds.size() == rep.seeds.size());
    CHECK(back.count_at_least(0.9) == rep.count_at_least(0.9));

    const TabularMomdp env = load_maze_env(cfg.maze);
    SuccessCriterion crit = cfg.success;
    crit.thresholds = cfg.reinforce.direction.thresholds;
    for (std::size_t i = 0; i < rep.seeds.size(); ++i) {
        CHECK(back.seeds[i].seed == rep.seeds[i].seed);
        CHECK(back.seeds[i].success_rate == rep.seeds[i].success_rate);
        const auto file = dir / fmt::format("reinforce-path_policy_seed{}.txt", rep.seeds[i].seed);
        const PolicyEval ev = evaluate_policy_file(file, env, crit, cfg.reinforce.eval_episodes, rep.seeds[i].seed,
                                                   cfg.reinforce.horizon);
        CHECK(ev.success_rate == rep.seeds[i].success_rate);
    }
}

TEST_CASE("a seed that aborts is reported without losing the others") {
    ExperimentConfig cfg = default_config(ExperimentKind::LpaBenchmark);
    cfg.out_dir = fresh_dir("abort");
    cfg.lpa.config.step_size = 1e200;
    cfg.seeds = {0, 1};
    const ExperimentReport rep = run_experiment(cfg, 1);
    CHECK(rep.failed == 2);
    CHECK(rep.seeds[0].error.find("seed 0") != std::string::npos);
    std::ifstream in(cfg.out_dir / "summary.csv");
    CHECK(read_summary_csv(in, cfg.kind).failed == 2);
}

TEST_CASE("evaluation baselines on maze-small") {
    const fs::path dir = fresh_dir("eval");
    MazeSettings ms;
    ms.source = "maze-small";
    const TabularMomdp env = load_maze_env(ms);
    SuccessCriterion crit;
    crit.thresholds = ThresholdVector({1.0});
    crit.require_terminal = true;

    // Up, Up reaches the goal at once.
    std::ofstream(dir / "direct.txt") << "tabular-policy 1\nstates 9\n0 0 0 0 0 0 0 0 0\n";
    CHECK(evaluate_policy_file(dir / "direct.txt", env, crit, 100, 0).success_rate == 1.0);
    // Left forever.
    std::ofstream(dir / "idle.txt") << "tabular-policy 1\nstates 9\n2 2 2 2 2 2 2 2 2\n";
    CHECK(evaluate_policy_file(dir / "idle.txt", env, crit, 100, 0).success_rate == 0.0);

    crit.include_last = true;
    crit.last_level = 0.0;
    const PolicyEval random = evaluate_policy(
        env, [](StateId, Rng& rng) { return uniform_index(rng, 4); }, crit, 1000, 0);
    CHECK(random.goal_rate == 1.0);
    CHECK(random.success_rate == doctest::Approx(0.077));
}

TEST_CASE("command line exit codes") {
    const fs::path dir = fresh_dir("cli");
    CHECK(cli("run --experiment lpa-benchmark --seeds 0 --out " + (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "summary.csv"));
    CHECK(cli("run --experiment nonsense --out " + dir.string()) == 2);
    CHECK(cli("bogus") == 2);

    std::ofstream(dir / "typo.ini") << "[lpa]\nstep_sise = 0.1\n";
    CHECK(cli("run --experiment lpa-benchmark --config " + (dir / "typo.ini").string() + " --out " + dir.string()) == 2);

    std::ofstream(dir / "blowup.ini") << "[lpa]\nstep_size = 1e200\n";
    CHECK(cli("run --experiment lpa-benchmark --config " + (dir / "blowup.ini").string() + " --seeds 0 --out " +
              (dir / "blow").string()) == 3);

    std::ofstream(dir / "train.ini") << "[tlq]\nepisodes = 200\nstats_every = 0\n";
    CHECK(cli("run --experiment tlq-train --config " + (dir / "train.ini").string() + " --seeds 0 --out " +
              (dir / "tlq").string()) == 0);
    CHECK(cli("eval --policy " + (dir / "tlq" / "tlq-train_policy_seed0.txt").string() + " --env maze-small") == 0);
    CHECK(cli("eval --policy " + (dir / "tlq" / "tlq-train_policy_seed0.txt").string() + " --env maze-extended") == 2);
}
