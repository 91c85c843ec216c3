#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tlo/config.hpp"

namespace tlo {

struct SeedReport {
    std::uint64_t seed = 0;
    double success_rate = 0.0;
    std::vector<std::pair<std::string, double>> metrics;
    std::string error;  // non-empty when the seed aborted
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::LpaBenchmark;
    std::vector<SeedReport> seeds;  // ordered by seed
    std::size_t failed = 0;

    // Seeds whose success rate reaches the level.
    std::size_t count_at_least(double level) const;
};

// Number of worker threads: TLO_WORKERS when set, else the core count.
std::size_t worker_count();

// Runs every seed on a bounded pool and writes <out>/<name>_seed<k>.csv,
// per-seed policy files where applicable, and <out>/summary.csv. Seeds that
// throw are recorded with their error; the report is returned either way.
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t workers = worker_count());

SeedReport run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const std::filesystem::path& out_dir);

void write_summary_csv(std::ostream& os, const ExperimentReport& report);

// Rebuilds the report from summary.csv.
ExperimentReport read_summary_csv(std::istream& is, ExperimentKind kind);

// Deterministic per-state action table.
void write_tabular_policy(std::ostream& os, const std::vector<ActionId>& policy);
std::vector<ActionId> read_tabular_policy(std::istream& is);

// Evaluates a saved policy (network or tabular) on a maze.
PolicyEval evaluate_policy_file(const std::filesystem::path& policy, const TabularMomdp& env,
                                const SuccessCriterion& criterion, std::size_t episodes, std::uint64_t seed,
                                std::size_t horizon = kDefaultHorizon);

}  // namespace tlo
