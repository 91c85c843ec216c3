#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tlo/adam.hpp"
#include "tlo/evaluation.hpp"
#include "tlo/lmdp.hpp"
#include "tlo/lpa.hpp"
#include "tlo/policy_network.hpp"

namespace tlo {

struct EpisodeRecord {
    Trajectory trajectory;
    std::vector<DropoutMask> masks;  // one per action taken
};

EpisodeRecord sample_episode(const TabularMomdp& env, const PolicyNetwork& net, NetMode mode, Rng& rng,
                             std::size_t horizon = kDefaultHorizon);

struct EpisodeGradients {
    GradientTuple m;                      // ascent direction per objective
    ValueVector f;                        // undiscounted totals
    std::vector<ValueVector> returns;     // returns[t] = G_{t+1}, the return after action t
};

EpisodeGradients episode_gradients(const PolicyNetwork& net, const EpisodeRecord& ep, double gamma,
                                   std::size_t objectives);

struct ReinforceConfig {
    DirectionConfig direction;
    std::size_t episodes = 4000;
    std::size_t horizon = kDefaultHorizon;
    double gamma = 0.99;
    AdamConfig adam;
    std::size_t window = 100;
    std::size_t hidden = 128;
    double dropout = 0.6;
    double temperature = 10.0;
    SuccessCriterion success;  // thresholds default to direction.thresholds when empty
    std::size_t eval_episodes = 100;
    bool check_cones = true;
    std::function<void(std::size_t episode, const PolicyNetwork&)> on_episode;
};

struct ReinforceTraceRow {
    std::size_t episode;
    std::vector<double> satisfaction;  // window rate per objective
    double joint;
    double direction_norm;
    bool skipped;
};

struct ReinforceResult {
    PolicyNetwork policy;
    std::vector<ReinforceTraceRow> trace;
    std::size_t skipped_updates = 0;
    PolicyEval eval;
};

// Lexicographic REINFORCE: one episode per update, direction from
// find_direction, Adam fed with the negated direction. Throws RuntimeAbort on
// non-finite parameters.
ReinforceResult reinforce_train(const TabularMomdp& env, const ReinforceConfig& cfg, std::uint64_t seed);

// Plain single-objective REINFORCE with the same network, sampling and
// optimiser streams.
ReinforceResult vanilla_reinforce_train(const TabularMomdp& env, const ReinforceConfig& cfg, std::uint64_t seed);

PolicyEval evaluate_network(const TabularMomdp& env, const PolicyNetwork& net, const SuccessCriterion& criterion,
                            std::size_t episodes, std::uint64_t seed, std::size_t horizon = kDefaultHorizon);

// Probability that the eval-mode policy follows the given actions from the
// initial state of a deterministic env.
double action_sequence_probability(const TabularMomdp& env, const PolicyNetwork& net,
                                   std::span<const ActionId> actions);

void write_rl_csv(std::ostream& os, const std::vector<ReinforceTraceRow>& trace);

}  // namespace tlo
