#include "tlo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "tlo/augmentation.hpp"
#include "tlo/errors.hpp"
#include "tlo/ftn.hpp"

namespace tlo {

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw RuntimeAbort(fmt::format("cannot write '{}'", p.string()));
    return os;
}

std::filesystem::path seed_file(const std::filesystem::path& dir, ExperimentKind k, std::uint64_t seed,
                                const std::string& suffix = "") {
    return dir / fmt::format("{}{}_seed{}.csv", to_string(k), suffix, seed);
}

SuccessCriterion criterion_for(const ExperimentConfig& cfg, const ThresholdVector& fallback) {
    SuccessCriterion c = cfg.success;
    if (c.thresholds.size() == 0) c.thresholds = fallback;
    return c;
}

void add_returns(SeedReport& r, const ValueVector& mean) {
    for (Eigen::Index i = 0; i < mean.size(); ++i) r.metrics.emplace_back(fmt::format("mean_return_{}", i + 1), mean[i]);
}

SeedReport run_lpa(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out) {
    const ObjectiveProblem problem = benchmark_problem();
    const LpaConfig& lc = cfg.lpa.config;
    const Vec x0 = cfg.lpa.x0.size() > 0 ? cfg.lpa.x0 : benchmark_setup(lc.direction.active_constraints).x0;
    if (static_cast<std::size_t>(x0.size()) != problem.dimension) throw ContractError("lpa.x0 has the wrong dimension");
    const LpaTrace trace = lpa_run(problem, x0, lc);
    auto os = open_out(seed_file(out, cfg.kind, seed));
    write_lpa_csv(os, trace);
    const TraceStep& last = trace.final_step();
    SeedReport r{seed, satisfied_prefix(last.values, lc.direction.thresholds) == lc.direction.thresholds.size() ? 1.0 : 0.0,
                 {}, {}};
    add_returns(r, last.values);
    for (Eigen::Index i = 0; i < last.x.size(); ++i) r.metrics.emplace_back(fmt::format("x{}", i + 1), last.x[i]);
    r.metrics.emplace_back("iterations", static_cast<double>(last.iteration));
    return r;
}

SeedReport run_tlq_train(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out) {
    const TabularMomdp env = load_maze_env(cfg.maze);
    const TlqResult res = train_tlq(env, cfg.tlq, seed);
    {
        auto os = open_out(seed_file(out, cfg.kind, seed));
        write_tlq_history_csv(os, res);
    }
    {
        auto os = open_out(out / fmt::format("{}_policy_seed{}.txt", to_string(cfg.kind), seed));
        write_tabular_policy(os, res.greedy_policy);
    }
    const ThresholdVector fallback(std::vector<double>(env.num_objectives() - 1, -std::numeric_limits<double>::infinity()));
    const auto& pi = res.greedy_policy;
    const PolicyEval ev = evaluate_policy(
        env, [&](StateId s, Rng&) { return pi[s]; }, criterion_for(cfg, fallback), cfg.tlq.eval_episodes, seed,
        cfg.tlq.horizon);
    SeedReport r{seed, ev.success_rate, {}, {}};
    add_returns(r, ev.mean_return);
    r.metrics.emplace_back("goal_rate", ev.goal_rate);
    r.metrics.emplace_back("policy_changes", static_cast<double>(res.policy_changes));
    return r;
}

SeedReport run_scan(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out) {
    const FailureScanReport rep = tlq_failure_scan(cfg.scan.gamma, cfg.scan.grid_points, cfg.maze.goal_reward);
    auto os = open_out(seed_file(out, cfg.kind, seed));
    write_failure_scan_csv(os, rep);
    const double n = static_cast<double>(rep.rows.size());
    SeedReport r{seed, n > 0 ? static_cast<double>(rep.pareto_configs) / n : 0.0, {}, {}};
    r.metrics = {{"configs", n},
                 {"pareto_configs", static_cast<double>(rep.pareto_configs)},
                 {"pareto_policies", static_cast<double>(rep.pareto_policies)},
                 {"pareto_path_lex_optimal", rep.pareto_path_lex_optimal ? 1.0 : 0.0},
                 {"enumeration_agrees", rep.enumeration_agrees ? 1.0 : 0.0}};
    return r;
}

SeedReport run_reinforce(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out) {
    const TabularMomdp env = load_maze_env(cfg.maze);
    ReinforceConfig rc = cfg.reinforce;
    rc.success = criterion_for(cfg, rc.direction.thresholds);
    const ReinforceResult res = reinforce_train(env, rc, seed);
    {
        auto os = open_out(seed_file(out, cfg.kind, seed));
        write_rl_csv(os, res.trace);
    }
    {
        auto os = open_out(out / fmt::format("{}_policy_seed{}.txt", to_string(cfg.kind), seed));
        res.policy.save(os);
    }
    SeedReport r{seed, res.eval.success_rate, {}, {}};
    add_returns(r, res.eval.mean_return);
    r.metrics.emplace_back("goal_rate", res.eval.goal_rate);
    r.metrics.emplace_back("skipped_updates", static_cast<double>(res.skipped_updates));
    return r;
}

SeedReport run_ftn(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out) {
    const FtnSpec spec = make_ftn_spec(cfg.ftn.depth, seed, cfg.ftn.target_leaf, cfg.ftn.margin);
    const TabularMomdp env = ftn_env(spec, cfg.maze.gamma);
    const std::vector<ActionId> path = spec.path_to(spec.target_leaf);
    const std::size_t every = std::max<std::size_t>(1, cfg.ftn.record_every);

    std::vector<std::vector<double>> curves;
    std::vector<std::size_t> episodes;
    SeedReport r{seed, 0.0, {}, {}};
    for (double deg : cfg.ftn.deltas_deg) {
        ReinforceConfig rc = cfg.reinforce;
        rc.direction.thresholds = spec.thresholds;
        rc.direction.delta = deg * std::numbers::pi / 180.0;
        rc.success = criterion_for(cfg, spec.thresholds);
        std::vector<double> curve;
        const bool first = curves.empty();
        rc.on_episode = [&](std::size_t ep, const PolicyNetwork& net) {
            if (ep % every != 0 && ep != rc.episodes) return;
            curve.push_back(action_sequence_probability(env, net, path));
            if (first) episodes.push_back(ep);
        };
        const ReinforceResult res = reinforce_train(env, rc, seed);
        const double final_p = curve.empty() ? 0.0 : curve.back();
        r.metrics.emplace_back(fmt::format("p_final_delta_{}", deg), final_p);
        if (deg > 0.0) r.success_rate = std::max(r.success_rate, final_p);
        curves.push_back(std::move(curve));
    }

    TlqConfig tc = cfg.ftn.tlq;
    tc.filter.params.assign(spec.thresholds.values().begin(), spec.thresholds.values().end());
    tc.thresholds = spec.thresholds;
    tc.stats_every = 0;
    const TlqResult tlq = train_tlq(env, tc, seed);
    StateId s = env.initial_state();
    bool reached = true;
    for (ActionId a : path) {
        if (tlq.greedy_policy[s] != a) {
            reached = false;
            break;
        }
        s = env.outcomes(s, a).front().next;
    }
    r.metrics.emplace_back("p_final_tlq", reached ? 1.0 : 0.0);
    r.metrics.emplace_back("thresholds_redrawn", static_cast<double>(spec.draw));

    auto os = open_out(seed_file(out, cfg.kind, seed));
    os << "# ftn v1\n";
    os << "episode";
    for (double deg : cfg.ftn.deltas_deg) os << ",p_delta_" << deg;
    os << '\n';
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        os << episodes[i];
        for (const auto& c : curves) os << ',' << (i < c.size() ? num(c[i]) : "");
        os << '\n';
    }
    return r;
}

SeedReport run_augment(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out) {
    MazeSettings ms = cfg.maze;
    ms.scheme = ObjectiveScheme::EndpointPrimary;
    const MazeSpec spec = load_maze_spec(ms);
    const std::size_t order[] = {1, 0};
    const TabularMomdp base = permute_objectives(maze_to_momdp(spec, ms.gamma), order);
    const AugmentedMdp aug = augment_single(base, 0, 0.0, cfg.augment.options);
    const AugmentedSolution sol = solve_augmented(aug);
    const std::vector<StateId> visited = follow_policy(aug, sol.policy);
    std::size_t hh = 0;
    for (std::size_t i = 1; i < visited.size(); ++i)
        hh += spec.tile(spec.cell(visited[i])) == Tile::HighPenalty ? 1 : 0;
    const bool goal = visited.back() == spec.state(spec.goal);
    const OrderingReport ord = ordering_check(base, aug, cfg.augment.ordering_max_length);

    auto os = open_out(seed_file(out, cfg.kind, seed));
    os << "# augment-path v1\n";
    os << "step,state,col,row\n";
    for (std::size_t i = 0; i < visited.size(); ++i) {
        const Cell c = spec.cell(visited[i]);
        os << i << ',' << visited[i] << ',' << c.col << ',' << c.row << '\n';
    }
    SeedReport r{seed, satisfaction_probability(aug, sol.policy), {}, {}};
    r.metrics = {{"augmented_states", static_cast<double>(aug.num_states())},
                 {"reached_goal", goal ? 1.0 : 0.0},
                 {"high_penalty_visits", static_cast<double>(hh)},
                 {"ordering_trajectories", static_cast<double>(ord.trajectories)},
                 {"ordering_pairs", static_cast<double>(ord.pairs)},
                 {"ordering_agreement", ord.pairs ? static_cast<double>(ord.agreements) / static_cast<double>(ord.pairs) : 1.0}};
    return r;
}

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

std::size_t ExperimentReport::count_at_least(double level) const {
    return static_cast<std::size_t>(std::count_if(seeds.begin(), seeds.end(), [&](const SeedReport& s) {
        return s.error.empty() && s.success_rate >= level;
    }));
}

std::size_t worker_count() {
    if (const char* env = std::getenv("TLO_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw ConfigError(fmt::format("TLO_WORKERS must be a positive integer, got '{}'", env));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SeedReport run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out_dir) {
    switch (cfg.kind) {
        case ExperimentKind::LpaBenchmark: return run_lpa(cfg, seed, out_dir);
        case ExperimentKind::TlqTrain: return run_tlq_train(cfg, seed, out_dir);
        case ExperimentKind::TlqFailureScan: return run_scan(cfg, seed, out_dir);
        case ExperimentKind::ReinforcePath:
        case ExperimentKind::ReinforceEndpoint: return run_reinforce(cfg, seed, out_dir);
        case ExperimentKind::Ftn: return run_ftn(cfg, seed, out_dir);
        case ExperimentKind::AugmentDemo: return run_augment(cfg, seed, out_dir);
    }
    throw ContractError("unknown experiment");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
    if (cfg.seeds.empty()) throw ConfigError("seed list is empty");
    std::filesystem::create_directories(cfg.out_dir);
    ExperimentReport report;
    report.kind = cfg.kind;
    report.seeds.resize(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
            const std::uint64_t seed = cfg.seeds[i];
            try {
                report.seeds[i] = run_seed(cfg, seed, cfg.out_dir);
            } catch (const std::exception& e) {
                report.seeds[i] = SeedReport{seed, 0.0, {}, fmt::format("seed {}: {}", seed, e.what())};
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t n = std::clamp<std::size_t>(workers, 1, cfg.seeds.size());
        for (std::size_t w = 0; w + 1 < n; ++w) pool.emplace_back(work);
        work();
    }
    std::stable_sort(report.seeds.begin(), report.seeds.end(),
                     [](const SeedReport& a, const SeedReport& b) { return a.seed < b.seed; });
    report.failed = static_cast<std::size_t>(
        std::count_if(report.seeds.begin(), report.seeds.end(), [](const SeedReport& s) { return !s.error.empty(); }));
    auto os = open_out(cfg.out_dir / "summary.csv");
    write_summary_csv(os, report);
    return report;
}

void write_summary_csv(std::ostream& os, const ExperimentReport& report) {
    std::vector<std::string> names;
    for (const auto& s : report.seeds)
        if (s.error.empty()) {
            for (const auto& [n, v] : s.metrics) names.push_back(n);
            break;
        }
    os << "# eval v1\n";
    os << "# experiment " << to_string(report.kind) << '\n';
    os << "seed,success_rate";
    for (const auto& n : names) os << ',' << n;
    os << ",status\n";
    for (const auto& s : report.seeds) {
        os << s.seed << ',' << num(s.success_rate);
        for (std::size_t i = 0; i < names.size(); ++i) os << ',' << (i < s.metrics.size() ? num(s.metrics[i].second) : "");
        os << ',' << (s.error.empty() ? "ok" : "abort: " + sanitize(s.error)) << '\n';
    }
}

ExperimentReport read_summary_csv(std::istream& is, ExperimentKind kind) {
    ExperimentReport r;
    r.kind = kind;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (header.empty()) {
            header = std::move(cells);
            if (header.size() < 3 || header[0] != "seed" || header[1] != "success_rate" || header.back() != "status")
                throw ParseError(0, "summary header must be seed,success_rate,...,status");
            continue;
        }
        if (cells.size() != header.size()) throw ParseError(0, "summary row has the wrong number of cells");
        SeedReport s;
        s.seed = std::stoull(cells[0]);
        s.success_rate = std::stod(cells[1]);
        for (std::size_t i = 2; i + 1 < cells.size(); ++i)
            if (!cells[i].empty()) s.metrics.emplace_back(header[i], std::stod(cells[i]));
        if (cells.back() != "ok") {
            s.error = cells.back();
            ++r.failed;
        }
        r.seeds.push_back(std::move(s));
    }
    return r;
}

void write_tabular_policy(std::ostream& os, const std::vector<ActionId>& policy) {
    os << "tabular-policy 1\n";
    os << "states " << policy.size() << '\n';
    for (std::size_t s = 0; s < policy.size(); ++s) os << policy[s] << (s + 1 == policy.size() ? "\n" : " ");
}

std::vector<ActionId> read_tabular_policy(std::istream& is) {
    std::string magic;
    int version = 0;
    std::string key;
    std::size_t n = 0;
    if (!(is >> magic >> version) || magic != "tabular-policy" || version != 1)
        throw ParseError(1, "expected 'tabular-policy 1'");
    if (!(is >> key >> n) || key != "states") throw ParseError(2, "expected 'states N'");
    std::vector<ActionId> pi(n);
    for (auto& a : pi)
        if (!(is >> a)) throw ParseError(3, "policy table is truncated");
    return pi;
}

PolicyEval evaluate_policy_file(const std::filesystem::path& policy, const TabularMomdp& env,
                                const SuccessCriterion& criterion, std::size_t episodes, std::uint64_t seed,
                                std::size_t horizon) {
    std::ifstream in(policy);
    if (!in) throw ConfigError(fmt::format("cannot open policy file '{}'", policy.string()));
    std::string first;
    std::getline(in, first);
    in.seekg(0);
    if (first.starts_with("tabular-policy")) {
        const auto pi = read_tabular_policy(in);
        if (pi.size() != env.num_states()) throw ConfigError("policy state count does not match the env");
        for (ActionId a : pi)
            if (a >= env.num_actions()) throw ConfigError("policy action out of range for the env");
        return evaluate_policy(env, [&](StateId s, Rng&) { return pi[s]; }, criterion, episodes, seed, horizon);
    }
    const PolicyNetwork net = PolicyNetwork::load(in);
    if (net.num_states() != env.num_states() || net.num_actions() != env.num_actions())
        throw ConfigError("policy network shape does not match the env");
    return evaluate_network(env, net, criterion, episodes, seed, horizon);
}

}  // namespace tlo
