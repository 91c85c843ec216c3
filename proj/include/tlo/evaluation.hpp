#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "tlo/lmdp.hpp"

namespace tlo {

// Per-objective satisfaction on undiscounted episode totals. Constrained
// objectives use their thresholds; the last objective uses last_level.
struct SuccessCriterion {
    ThresholdVector thresholds;
    double last_level = -std::numeric_limits<double>::infinity();
    bool include_last = false;
    bool require_terminal = false;

    std::vector<bool> satisfied(const ValueVector& totals) const;
    bool success(const ValueVector& totals, bool terminated) const;
};

struct PolicyEval {
    std::size_t episodes = 0;
    double success_rate = 0.0;
    double goal_rate = 0.0;
    ValueVector mean_return;  // undiscounted
};

using StochasticPolicy = std::function<ActionId(StateId, Rng&)>;

PolicyEval evaluate_policy(const TabularMomdp& env, const StochasticPolicy& policy,
                           const SuccessCriterion& criterion, std::size_t episodes, std::uint64_t seed,
                           std::size_t horizon = kDefaultHorizon);

}  // namespace tlo
