#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tlo/errors.hpp"
#include "tlo/lmdp.hpp"

namespace tlo {

enum class PayoffLayout {
    TerminalPayoff,     // payoff only on entering a terminal within budget
    AccumulatedPayoff,  // payoff summed in a second accumulator, paid at the terminal
    ShapedPayoff,       // payoff every step, violations shifted down by C_l
};

struct AugmentOptions {
    double lambda = 1.0;
    PayoffLayout layout = PayoffLayout::TerminalPayoff;
    std::size_t horizon = kDefaultHorizon;  // accumulators are exact for episodes up to this length
    double gamma = 0.99;                    // discount of the scalar objective
    std::size_t max_states = 2'000'000;
    std::optional<std::size_t> payoff_objective;  // defaults to the last objective
};

// Scalar MDP over (s, c_1..c_m[, p]) where c_j is the remaining budget of a
// tracked objective, starting at -tau_j and moving by its reward.
struct AugmentedMdp {
    TabularMomdp mdp;  // one objective
    std::vector<std::size_t> tracked;
    std::vector<double> thresholds;
    std::size_t payoff_objective = 0;
    double lambda = 1.0;
    double c_l = 0.0;
    PayoffLayout layout = PayoffLayout::TerminalPayoff;
    std::size_t horizon = kDefaultHorizon;
    std::vector<StateId> base_state;             // per augmented state
    std::vector<std::vector<double>> budget;     // per augmented state, one entry per tracked objective
    std::vector<double> accumulated_payoff;      // per augmented state, AccumulatedPayoff only
    std::vector<std::vector<double>> budget_grid;  // sorted reachable values per tracked objective

    std::size_t num_states() const { return base_state.size(); }
    bool within_budget(StateId aug) const;
    // Augmented successor of aug under base outcome index `outcome` of action a.
    StateId successor(StateId aug, ActionId a, std::size_t outcome) const;
};

AugmentedMdp augment(const TabularMomdp& base, std::span<const std::size_t> tracked,
                     std::span<const double> thresholds, const AugmentOptions& opts = {});

AugmentedMdp augment_single(const TabularMomdp& base, std::size_t constrained, double threshold,
                            const AugmentOptions& opts = {});

// Undiscounted scalar return of a base action sequence lifted into the
// augmented MDP. Requires deterministic transitions.
double augmented_return(const AugmentedMdp& aug, std::span<const ActionId> actions);

// Undiscounted per-objective totals of a base action sequence; the payoff
// objective is moved last so the result can be compared with lex_compare.
ValueVector ordered_totals(const TabularMomdp& base, const AugmentedMdp& aug, std::span<const ActionId> actions);

bool ordering_preserved(const TabularMomdp& base, const AugmentedMdp& aug, std::span<const ActionId> first,
                        std::span<const ActionId> second);

// Action sequences of length 1..max_length whose first terminal visit is the
// last step, on a deterministic env.
std::vector<std::vector<ActionId>> terminating_sequences(const TabularMomdp& base, std::size_t max_length);

struct OrderingReport {
    std::size_t trajectories = 0;
    std::size_t pairs = 0;  // ordered pairs, including each trajectory with itself
    std::size_t agreements = 0;
};

// ordering_preserved over every ordered pair of terminating sequences.
OrderingReport ordering_check(const TabularMomdp& base, const AugmentedMdp& aug, std::size_t max_length);

struct AugmentedSolution {
    std::vector<ActionId> policy;  // per augmented state
    Eigen::VectorXd value;
    std::size_t sweeps = 0;
};

AugmentedSolution solve_augmented(const AugmentedMdp& aug, double tol = 1e-10, std::size_t max_sweeps = 1'000'000);

// Probability that the policy reaches a terminal with every budget
// non-negative within the horizon.
double satisfaction_probability(const AugmentedMdp& aug, const std::vector<ActionId>& policy);

// Base states visited by the greedy policy from the initial state of a
// deterministic env, until a terminal or the horizon.
std::vector<StateId> follow_policy(const AugmentedMdp& aug, const std::vector<ActionId>& policy);

enum class SearchStrategy { Linear, Binary };

struct ConstraintSearchResult {
    std::size_t satisfiable = 0;  // leading constrained objectives jointly satisfiable
    std::size_t solver_calls = 0;
    std::optional<AugmentedMdp> witness_mdp;
    std::vector<ActionId> witness_policy;
};

class ConstraintSearchError : public RuntimeAbort {
public:
    ConstraintSearchError(const std::string& what, ConstraintSearchResult partial)
        : RuntimeAbort(what), partial_(std::move(partial)) {}
    const ConstraintSearchResult& partial() const { return partial_; }

private:
    ConstraintSearchResult partial_;
};

// Objectives 0..K-2 are constrained by tau; the last is the payoff.
ConstraintSearchResult constraint_search(const TabularMomdp& base, const ThresholdVector& tau, SearchStrategy strategy,
                                         AugmentOptions opts = {});

// Same env with objectives reordered: result objective i is base objective order[i].
TabularMomdp permute_objectives(const TabularMomdp& base, std::span<const std::size_t> order);

// maze-small with the HH penalty as the constrained objective (budget 0) and
// the goal reward as the payoff.
TabularMomdp maze_small_budget_variant(double gamma = 0.99);

}  // namespace tlo
