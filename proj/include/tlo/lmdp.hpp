#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tlo/random.hpp"

namespace tlo {

using StateId = std::size_t;
using ActionId = std::size_t;
using ValueVector = Eigen::VectorXd;

enum class Ordering { Less, Equal, Greater };

inline int sign(Ordering o) { return o == Ordering::Less ? -1 : (o == Ordering::Greater ? 1 : 0); }

// Thresholds for the first K-1 objectives; the last objective has none.
class ThresholdVector {
public:
    ThresholdVector() = default;
    explicit ThresholdVector(std::vector<double> tau);

    std::size_t size() const { return tau_.size(); }
    double operator[](std::size_t i) const { return tau_[i]; }
    std::span<const double> values() const { return tau_; }

private:
    std::vector<double> tau_;
};

Ordering lex_compare(const ValueVector& u, const ValueVector& v, const ThresholdVector& tau);

// Number of leading constraints that hold, i.e. the zero-based index of the
// first unsatisfied objective, or K-1 when every constraint holds.
std::size_t satisfied_prefix(const ValueVector& u, const ThresholdVector& tau);

struct Outcome {
    StateId next;
    double probability;
    ValueVector reward;
};

class TabularMomdp {
public:
    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    std::size_t num_objectives() const { return num_objectives_; }
    StateId initial_state() const { return initial_; }
    double gamma() const { return gamma_; }
    bool is_terminal(StateId s) const { return terminal_[s]; }
    std::vector<StateId> terminal_states() const;
    const std::vector<Outcome>& outcomes(StateId s, ActionId a) const {
        return outcomes_[s * num_actions_ + a];
    }

    // Index into outcomes(s, a) drawn from the transition kernel.
    std::size_t sample(StateId s, ActionId a, Rng& rng) const;

    bool is_deterministic() const;

private:
    friend class MomdpBuilder;
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::size_t num_objectives_ = 0;
    StateId initial_ = 0;
    double gamma_ = 1.0;
    std::vector<bool> terminal_;
    std::vector<std::vector<Outcome>> outcomes_;
};

class MomdpBuilder {
public:
    MomdpBuilder(std::size_t states, std::size_t actions, std::size_t objectives);

    MomdpBuilder& gamma(double g);
    MomdpBuilder& initial(StateId s);
    MomdpBuilder& terminal(StateId s);
    MomdpBuilder& transition(StateId s, ActionId a, StateId next, double p, ValueVector reward);

    // Terminal states become absorbing with zero reward. Throws ContractError
    // when a non-terminal row is not a probability distribution.
    TabularMomdp build() const;

private:
    TabularMomdp m_;
};

struct Trajectory {
    std::vector<StateId> states;
    std::vector<ActionId> actions;
    std::vector<ValueVector> rewards;
    bool terminated = false;

    std::size_t length() const { return actions.size(); }
};

inline constexpr std::size_t kDefaultHorizon = 200;

ValueVector episode_return(const Trajectory& traj, double gamma, std::size_t objectives);
ValueVector episode_return(const Trajectory& traj, double gamma);

template <class Policy>
Trajectory rollout(const TabularMomdp& env, Policy&& policy, Rng& rng,
                   std::size_t horizon = kDefaultHorizon) {
    Trajectory t;
    StateId s = env.initial_state();
    t.states.push_back(s);
    while (!env.is_terminal(s) && t.actions.size() < horizon) {
        const ActionId a = policy(s, rng);
        const Outcome& o = env.outcomes(s, a)[env.sample(s, a, rng)];
        t.actions.push_back(a);
        t.rewards.push_back(o.reward);
        s = o.next;
        t.states.push_back(s);
    }
    t.terminated = env.is_terminal(s);
    return t;
}

struct ValueIterationResult {
    Eigen::MatrixXd q;  // states x actions
    std::size_t sweeps = 0;
    bool converged = false;
};

// Optimal action values of a single objective.
ValueIterationResult optimal_q(const TabularMomdp& env, std::size_t objective, double tol = 1e-10,
                               std::size_t max_sweeps = 1000000);

void write_momdp(std::ostream& os, const TabularMomdp& m);
TabularMomdp read_momdp(std::istream& is);

}  // namespace tlo
