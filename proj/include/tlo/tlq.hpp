#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tlo/lmdp.hpp"
#include "tlo/maze.hpp"

namespace tlo {

enum class TlqVariant { GaborRectified, LiRaw };
enum class FilterKind { AbsoluteThreshold, AbsoluteSlack, RelativeSlack };

// One parameter per filtered objective: tau, delta or eta.
struct Filter {
    FilterKind kind = FilterKind::AbsoluteSlack;
    std::vector<double> params;
};

using ActionSet = std::vector<ActionId>;

class VectorQTable {
public:
    VectorQTable(std::size_t states, std::size_t actions, std::size_t objectives,
                 TlqVariant variant = TlqVariant::LiRaw);

    std::size_t num_states() const { return states_; }
    std::size_t num_actions() const { return actions_; }
    std::size_t num_objectives() const { return tables_.size(); }
    TlqVariant variant() const { return variant_; }

    double& operator()(std::size_t i, StateId s, ActionId a) {
        return tables_[i](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
    }
    double operator()(std::size_t i, StateId s, ActionId a) const {
        return tables_[i](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
    }
    const Eigen::MatrixXd& table(std::size_t i) const { return tables_[i]; }
    Eigen::MatrixXd& table(std::size_t i) { return tables_[i]; }
    bool all_finite() const;

private:
    std::size_t states_;
    std::size_t actions_;
    TlqVariant variant_;
    std::vector<Eigen::MatrixXd> tables_;
};

ActionSet all_actions(std::size_t n);

// Lowest index wins ties.
ActionId argmax_over(const VectorQTable& q, std::size_t objective, StateId s, const ActionSet& set);

ActionSet acceptable_actions(StateId s, const VectorQTable& q, const ActionSet& prev,
                             std::size_t objective, const Filter& filter);

// Survivors of the filters for objectives 0..upto-1.
ActionSet acceptable_chain(StateId s, const VectorQTable& q, std::size_t upto, const Filter& filter);

ActionId greedy_action(StateId s, const VectorQTable& q, const Filter& filter);
ActionId select_action(StateId s, const VectorQTable& q, double epsilon, const Filter& filter, Rng& rng);

// Two objectives, both filtered.
ActionId cyclic_select_action(StateId s, const VectorQTable& q, const Filter& filter);

struct SampledTransition {
    StateId s;
    ActionId a;
    StateId next;
    ValueVector reward;
    bool terminal;
};

void tlq_update_gabor(VectorQTable& q, const SampledTransition& t, const Filter& filter,
                      const ThresholdVector& tau, double lr, double gamma);
void tlq_update_li(VectorQTable& q, const SampledTransition& t, const Filter& filter, double lr,
                   double gamma);
// Primary target bootstraps through the secondary's choice among the buffered
// acceptable set. Throws UnsupportedConfiguration unless K = 2.
void tlq_update_informed(VectorQTable& q, const SampledTransition& t, const Filter& filter,
                         double buffer, double lr, double gamma);

enum class UpdateRule { Standard, Informed };

struct TlqConfig {
    double learning_rate = 0.1;
    double epsilon = 0.1;
    std::size_t episodes = 50000;
    std::size_t horizon = kDefaultHorizon;
    std::size_t eval_episodes = 100;
    Filter filter;
    TlqVariant variant = TlqVariant::LiRaw;
    ThresholdVector thresholds;  // rectification levels for the Gabor variant
    UpdateRule rule = UpdateRule::Standard;
    double buffer = 0.0;
    bool cyclic_selection = false;
    std::size_t stats_every = 1000;
};

struct TlqEvalStats {
    double goal_rate = 0.0;
    ValueVector mean_return;  // undiscounted
};

struct TlqHistoryRow {
    std::size_t episode;
    double goal_rate;
    ValueVector mean_return;
};

struct TlqResult {
    VectorQTable q;
    std::vector<ActionId> greedy_policy;
    TlqEvalStats stats;
    std::vector<TlqHistoryRow> history;  // greedy evaluations during training
    std::size_t policy_changes = 0;      // greedy-action flips across history checkpoints
};

TlqResult train_tlq(const TabularMomdp& env, const TlqConfig& cfg, std::uint64_t seed);

TlqEvalStats evaluate_greedy(const TabularMomdp& env, const std::vector<ActionId>& policy,
                             std::size_t episodes, std::size_t horizon, std::uint64_t seed = 0);

void write_tlq_history_csv(std::ostream& os, const TlqResult& r);

struct TlqSweepResult {
    VectorQTable q;
    std::size_t sweeps = 0;
    bool converged = false;
};

// Synchronous full-expectation sweeps of the chosen update until the sup-norm
// change drops below tol.
TlqSweepResult tlq_value_iteration(const TabularMomdp& env, const TlqConfig& cfg, double tol = 1e-10,
                                   std::size_t max_sweeps = 200000);

std::vector<ActionId> greedy_policy(const TabularMomdp& env, const VectorQTable& q, const TlqConfig& cfg);

struct Interval {
    double lo;
    double hi;  // half-open [lo, hi)
    bool contains(double x) const { return x >= lo && x < hi; }
};

// Slacks delta_1 for which Absolute Slacking accepts the HH-avoiding detour on
// maze-small and still refuses to stall next to the goal.
std::optional<Interval> slack_feasibility_maze_small(double gamma, double goal_reward = 1.0);

// Brute force on value-iterated primary action values: Right stays acceptable
// at (1,0) while Left is the only acceptable action at (2,2).
bool slack_detour_acceptable(double gamma, double delta, double goal_reward = 1.0);

// (1,0) -> (2,0) -> (2,1) -> (2,2) -> (1,2) on maze-small.
std::vector<StateId> maze_small_pareto_path();

struct FailureScanRow {
    FilterKind filter;
    double parameter;
    bool reached_goal;
    std::size_t high_penalty_visits;
    bool pareto;
    std::size_t sweeps;
};

struct FailureScanReport {
    std::vector<FailureScanRow> rows;
    std::size_t pareto_configs = 0;
    std::size_t pareto_policies = 0;        // deterministic policies realising the path
    bool pareto_path_lex_optimal = false;   // checked over every deterministic policy
    bool enumeration_agrees = false;        // rollout outcomes match the enumeration table
};

// Exact value iteration on maze-small for each filter over a grid of points.
FailureScanReport tlq_failure_scan(double gamma = 0.99, std::size_t grid_points = 50,
                                   double goal_reward = 1.0);

void write_failure_scan_csv(std::ostream& os, const FailureScanReport& r);

std::string to_string(FilterKind k);
FilterKind filter_kind_from_string(const std::string& s);
std::string to_string(TlqVariant v);
TlqVariant tlq_variant_from_string(const std::string& s);

}  // namespace tlo
