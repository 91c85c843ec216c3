#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tlo/augmentation.hpp"
#include "tlo/evaluation.hpp"
#include "tlo/lpa.hpp"
#include "tlo/maze.hpp"
#include "tlo/reinforce.hpp"
#include "tlo/tlq.hpp"

namespace tlo {

enum class ExperimentKind {
    LpaBenchmark,
    TlqTrain,
    TlqFailureScan,
    ReinforcePath,
    ReinforceEndpoint,
    Ftn,
    AugmentDemo,
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);  // throws ConfigError

struct MazeSettings {
    std::string source;  // built-in name or path to a maze file
    ObjectiveScheme scheme = ObjectiveScheme::EndpointPrimary;
    double high_penalty = -5.0;
    double low_penalty = -4.0;
    double goal_reward = 1.0;
    double gamma = 0.99;
};

struct LpaSettings {
    LpaConfig config;
    Vec x0;
};

struct FtnSettings {
    int depth = 5;
    std::size_t target_leaf = 0;
    double margin = 1e-3;
    std::vector<double> deltas_deg{0.0, 5.0, 20.0, 40.0};
    std::size_t record_every = 100;
    TlqConfig tlq;
};

struct ScanSettings {
    double gamma = 0.99;
    std::size_t grid_points = 50;
};

struct AugmentSettings {
    AugmentOptions options;
    std::size_t ordering_max_length = 8;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::LpaBenchmark;
    MazeSettings maze;
    LpaSettings lpa;
    TlqConfig tlq;
    ReinforceConfig reinforce;
    SuccessCriterion success;
    FtnSettings ftn;
    ScanSettings scan;
    AugmentSettings augment;
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path out_dir = "results";
};

// Defaults used by each named experiment before a config file is applied.
ExperimentConfig default_config(ExperimentKind kind);

// INI sections [experiment], [maze], [lpa], [tlq], [reinforce], [success],
// [ftn], [scan], [augment]. Unknown sections or keys throw ConfigError.
void apply_config(ExperimentConfig& cfg, std::istream& ini);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& file);

// "0..9", "3", or "0,2,5".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

TabularMomdp load_maze_env(const MazeSettings& maze);
MazeSpec load_maze_spec(const MazeSettings& maze);

}  // namespace tlo
