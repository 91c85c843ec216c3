#include "tlo/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "tlo/errors.hpp"

namespace tlo {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

const std::map<std::string, ExperimentKind>& kind_names() {
    static const std::map<std::string, ExperimentKind> names = {
        {"lpa-benchmark", ExperimentKind::LpaBenchmark},
        {"tlq-train", ExperimentKind::TlqTrain},
        {"tlq-failure-scan", ExperimentKind::TlqFailureScan},
        {"reinforce-path", ExperimentKind::ReinforcePath},
        {"reinforce-endpoint", ExperimentKind::ReinforceEndpoint},
        {"ftn", ExperimentKind::Ftn},
        {"augment-demo", ExperimentKind::AugmentDemo},
    };
    return names;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used == t.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, text));
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text));
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(to_double(key, item));
    }
    return out;
}

template <class F>
auto rethrow_as_config(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;
using Section = std::map<std::string, Setter>;

template <class T>
Setter number(T ExperimentConfig::*group, double T::*field) {
    return [=](ExperimentConfig& c, const std::string& k, const std::string& v) { (c.*group).*field = to_double(k, v); };
}

const std::map<std::string, Section>& schema() {
    static const std::map<std::string, Section> s = {
        {"experiment",
         {
             {"name", [](ExperimentConfig& c, const std::string&, const std::string& v) {
                  c.kind = experiment_kind_from_string(trim(v));
              }},
             {"seeds", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.seeds = parse_seed_list(v); }},
             {"out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = trim(v); }},
         }},
        {"maze",
         {
             {"source", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.maze.source = trim(v); }},
             {"scheme", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.maze.scheme = rethrow_as_config(k, [&] { return objective_scheme_from_string(trim(v)); });
              }},
             {"high_penalty", number(&ExperimentConfig::maze, &MazeSettings::high_penalty)},
             {"low_penalty", number(&ExperimentConfig::maze, &MazeSettings::low_penalty)},
             {"goal_reward", number(&ExperimentConfig::maze, &MazeSettings::goal_reward)},
             {"gamma", number(&ExperimentConfig::maze, &MazeSettings::gamma)},
         }},
        {"lpa",
         {
             {"step_size", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.lpa.config.step_size = to_double(k, v);
              }},
             {"max_iters", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.lpa.config.max_iters = to_unsigned(k, v);
              }},
             {"delta", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.lpa.config.direction.delta = to_double(k, v);
              }},
             {"delta_deg", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.lpa.config.direction.delta = to_double(k, v) * kDegree;
              }},
             {"thresholds", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.lpa.config.direction.thresholds = ThresholdVector(to_list(k, v));
              }},
             {"active_constraints", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.lpa.config.direction.active_constraints = to_bool(k, v);
              }},
             {"buffer", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.lpa.config.direction.buffer = to_double(k, v);
              }},
             {"x0", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  const auto xs = to_list(k, v);
                  c.lpa.x0 = Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
              }},
         }},
        {"tlq",
         {
             {"learning_rate", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.learning_rate = to_double(k, v);
              }},
             {"epsilon", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.tlq.epsilon = to_double(k, v); }},
             {"episodes", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.episodes = to_unsigned(k, v);
              }},
             {"horizon", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.tlq.horizon = to_unsigned(k, v); }},
             {"eval_episodes", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.eval_episodes = to_unsigned(k, v);
              }},
             {"filter", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.filter.kind = rethrow_as_config(k, [&] { return filter_kind_from_string(trim(v)); });
              }},
             {"filter_params", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.filter.params = to_list(k, v);
              }},
             {"variant", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.variant = rethrow_as_config(k, [&] { return tlq_variant_from_string(trim(v)); });
              }},
             {"thresholds", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.thresholds = ThresholdVector(to_list(k, v));
              }},
             {"rule", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  const std::string t = trim(v);
                  if (t == "standard") c.tlq.rule = UpdateRule::Standard;
                  else if (t == "informed") c.tlq.rule = UpdateRule::Informed;
                  else throw ConfigError(fmt::format("{}: unknown update rule '{}'", k, t));
              }},
             {"buffer", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.tlq.buffer = to_double(k, v); }},
             {"cyclic_selection", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.cyclic_selection = to_bool(k, v);
              }},
             {"stats_every", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.tlq.stats_every = to_unsigned(k, v);
              }},
         }},
        {"reinforce",
         {
             {"episodes", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.episodes = to_unsigned(k, v);
              }},
             {"horizon", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.horizon = to_unsigned(k, v);
              }},
             {"gamma", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.reinforce.gamma = to_double(k, v); }},
             {"learning_rate", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.adam.learning_rate = to_double(k, v);
              }},
             {"beta1", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.adam.beta1 = to_double(k, v);
              }},
             {"beta2", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.adam.beta2 = to_double(k, v);
              }},
             {"adam_epsilon", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.adam.epsilon = to_double(k, v);
              }},
             {"window", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.window = to_unsigned(k, v);
              }},
             {"hidden", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.hidden = to_unsigned(k, v);
              }},
             {"dropout", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.dropout = to_double(k, v);
              }},
             {"temperature", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.temperature = to_double(k, v);
              }},
             {"eval_episodes", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.eval_episodes = to_unsigned(k, v);
              }},
             {"thresholds", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.direction.thresholds = ThresholdVector(to_list(k, v));
              }},
             {"delta", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.direction.delta = to_double(k, v);
              }},
             {"delta_deg", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.direction.delta = to_double(k, v) * kDegree;
              }},
             {"active_constraints", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.direction.active_constraints = to_bool(k, v);
              }},
             {"buffer", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.direction.buffer = to_double(k, v);
              }},
             {"check_cones", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.reinforce.check_cones = to_bool(k, v);
              }},
         }},
        {"success",
         {
             {"thresholds", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.success.thresholds = ThresholdVector(to_list(k, v));
              }},
             {"last_level", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.success.last_level = to_double(k, v);
              }},
             {"include_last", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.success.include_last = to_bool(k, v);
              }},
             {"require_terminal", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.success.require_terminal = to_bool(k, v);
              }},
         }},
        {"ftn",
         {
             {"depth", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.ftn.depth = static_cast<int>(to_unsigned(k, v));
              }},
             {"target_leaf", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.ftn.target_leaf = to_unsigned(k, v);
              }},
             {"margin", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.ftn.margin = to_double(k, v); }},
             {"deltas_deg", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.ftn.deltas_deg = to_list(k, v);
              }},
             {"record_every", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.ftn.record_every = to_unsigned(k, v);
              }},
             {"tlq_episodes", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.ftn.tlq.episodes = to_unsigned(k, v);
              }},
             {"tlq_learning_rate", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.ftn.tlq.learning_rate = to_double(k, v);
              }},
             {"tlq_epsilon", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.ftn.tlq.epsilon = to_double(k, v);
              }},
             {"tlq_variant", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.ftn.tlq.variant = rethrow_as_config(k, [&] { return tlq_variant_from_string(trim(v)); });
              }},
         }},
        {"scan",
         {
             {"gamma", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.scan.gamma = to_double(k, v); }},
             {"grid_points", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.scan.grid_points = to_unsigned(k, v);
              }},
         }},
        {"augment",
         {
             {"lambda", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.augment.options.lambda = to_double(k, v);
              }},
             {"layout", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  const std::string t = trim(v);
                  if (t == "terminal") c.augment.options.layout = PayoffLayout::TerminalPayoff;
                  else if (t == "accumulated") c.augment.options.layout = PayoffLayout::AccumulatedPayoff;
                  else if (t == "shaped") c.augment.options.layout = PayoffLayout::ShapedPayoff;
                  else throw ConfigError(fmt::format("{}: unknown layout '{}' (terminal|accumulated|shaped)", k, t));
              }},
             {"horizon", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.augment.options.horizon = to_unsigned(k, v);
              }},
             {"gamma", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.augment.options.gamma = to_double(k, v);
              }},
             {"max_states", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.augment.options.max_states = to_unsigned(k, v);
              }},
             {"ordering_max_length", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                  c.augment.ordering_max_length = to_unsigned(k, v);
              }},
         }},
    };
    return s;
}

void validate(const ExperimentConfig& c) {
    if (c.seeds.empty()) throw ConfigError("seed list is empty");
    if (!(c.tlq.epsilon >= 0.0 && c.tlq.epsilon <= 1.0)) throw ConfigError("tlq.epsilon must lie in [0, 1]");
    if (!(c.tlq.learning_rate > 0.0 && c.tlq.learning_rate <= 1.0))
        throw ConfigError("tlq.learning_rate must lie in (0, 1]");
    if (!(c.reinforce.dropout >= 0.0 && c.reinforce.dropout < 1.0))
        throw ConfigError("reinforce.dropout must lie in [0, 1)");
    if (!(c.reinforce.adam.learning_rate > 0.0)) throw ConfigError("reinforce.learning_rate must be positive");
    if (!(c.augment.options.lambda > 0.0)) throw ConfigError("augment.lambda must be positive");
    if (!(c.lpa.config.direction.delta >= 0.0 && c.lpa.config.direction.delta < std::numbers::pi / 2))
        throw ConfigError("lpa.delta must lie in [0, pi/2)");
    if (!(c.reinforce.direction.delta >= 0.0 && c.reinforce.direction.delta < std::numbers::pi / 2))
        throw ConfigError("reinforce.delta must lie in [0, pi/2)");
    for (double d : c.ftn.deltas_deg)
        if (!(d >= 0.0 && d < 90.0)) throw ConfigError("ftn.deltas_deg entries must lie in [0, 90)");
    if (c.ftn.depth < 1 || c.ftn.depth > 16) throw ConfigError("ftn.depth must lie in [1, 16]");
    if (c.ftn.target_leaf >= (std::size_t{1} << c.ftn.depth)) throw ConfigError("ftn.target_leaf out of range");
}

}  // namespace

std::string to_string(ExperimentKind k) {
    for (const auto& [name, kind] : kind_names())
        if (kind == k) return name;
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    const auto it = kind_names().find(s);
    if (it == kind_names().end()) {
        std::string known;
        for (const auto& [name, kind] : kind_names()) known += (known.empty() ? "" : ", ") + name;
        throw ConfigError(fmt::format("unknown experiment '{}' (expected one of {})", s, known));
    }
    return it->second;
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    const BenchmarkSetup bench = benchmark_setup(false);
    c.lpa.config = bench.config;
    c.reinforce.direction.buffer = 0.01;
    switch (kind) {
        case ExperimentKind::LpaBenchmark:
            break;
        case ExperimentKind::TlqTrain:
            c.maze.source = "maze-small";
            c.maze.scheme = ObjectiveScheme::EndpointPrimary;
            c.tlq.filter = {FilterKind::AbsoluteSlack, {0.05}};
            c.tlq.variant = TlqVariant::LiRaw;
            c.success.thresholds = ThresholdVector({1.0});
            c.success.last_level = 0.0;
            c.success.include_last = true;
            break;
        case ExperimentKind::TlqFailureScan:
            c.maze.source = "maze-small";
            break;
        case ExperimentKind::ReinforcePath:
            c.maze.source = "maze-extended";
            c.maze.scheme = ObjectiveScheme::PathPenaltyPrimary;
            c.reinforce.direction.thresholds = ThresholdVector({0.0});
            c.reinforce.direction.delta = 15.0 * kDegree;
            c.reinforce.adam.learning_rate = 0.03;
            c.seeds = parse_seed_list("0..9");
            break;
        case ExperimentKind::ReinforceEndpoint:
            c.maze.source = "maze-concave-simple";
            c.maze.scheme = ObjectiveScheme::EndpointPrimary;
            c.reinforce.direction.thresholds = ThresholdVector({1.0});
            c.reinforce.direction.delta = 20.0 * kDegree;
            c.reinforce.adam.learning_rate = 0.01;
            c.success.last_level = 0.0;
            c.success.include_last = true;
            c.seeds = parse_seed_list("0..9");
            break;
        case ExperimentKind::Ftn:
            c.reinforce.adam.learning_rate = 0.01;
            c.ftn.tlq.episodes = 4000;
            c.ftn.tlq.filter.kind = FilterKind::AbsoluteThreshold;
            c.ftn.tlq.variant = TlqVariant::LiRaw;
            c.seeds = parse_seed_list("0..2");
            break;
        case ExperimentKind::AugmentDemo:
            c.maze.source = "maze-small";
            break;
    }
    return c;
}

void apply_config(ExperimentConfig& cfg, std::istream& ini) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(ini, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()));
    }
    const auto& sch = schema();
    if (const auto exp = tree.get_child_optional("experiment")) {
        if (const auto name = exp->get_optional<std::string>("name")) {
            if (experiment_kind_from_string(trim(*name)) != cfg.kind)
                throw ConfigError(fmt::format("config is for experiment '{}', not '{}'", trim(*name), to_string(cfg.kind)));
        }
    }
    for (const auto& [section, body] : tree) {
        const auto s = sch.find(section);
        if (s == sch.end()) {
            if (body.empty()) throw ConfigError(fmt::format("key '{}' must be inside a section", section));
            throw ConfigError(fmt::format("unknown section [{}]", section));
        }
        for (const auto& [key, value] : body) {
            const auto setter = s->second.find(key);
            if (setter == s->second.end()) throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, section));
            setter->second(cfg, section + "." + key, value.data());
        }
    }
    validate(cfg);
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", file.string()));
    try {
        apply_config(cfg, in);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", file.string(), e.what()));
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    const std::string t = trim(text);
    std::vector<std::uint64_t> out;
    if (const auto dots = t.find(".."); dots != std::string::npos) {
        const std::uint64_t lo = to_unsigned("seeds", t.substr(0, dots));
        const std::uint64_t hi = to_unsigned("seeds", t.substr(dots + 2));
        if (hi < lo) throw ConfigError(fmt::format("seeds: empty range '{}'", t));
        if (hi - lo >= 1'000'000) throw ConfigError("seeds: range too large");
        for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_unsigned("seeds", item));
    if (out.empty()) throw ConfigError("seed list is empty");
    return out;
}

MazeSpec load_maze_spec(const MazeSettings& maze) {
    MazeSpec spec;
    const auto& builtins = builtin_maze_texts();
    if (builtins.contains(maze.source)) {
        spec = builtin_maze(maze.source);
    } else {
        std::ifstream in(maze.source);
        if (!in) throw ConfigError(fmt::format("maze '{}' is neither built in nor a readable file", maze.source));
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            spec = parse_maze(buf.str());
        } catch (const ParseError& e) {
            throw ConfigError(fmt::format("{}: {}", maze.source, e.what()));
        }
    }
    spec.scheme = maze.scheme;
    spec.high_penalty = maze.high_penalty;
    spec.low_penalty = maze.low_penalty;
    spec.goal_reward = maze.goal_reward;
    return spec;
}

TabularMomdp load_maze_env(const MazeSettings& maze) {
    return maze_to_momdp(load_maze_spec(maze), maze.gamma);
}

}  // namespace tlo
