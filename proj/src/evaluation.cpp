#include "tlo/evaluation.hpp"

#include "tlo/errors.hpp"

namespace tlo {

std::vector<bool> SuccessCriterion::satisfied(const ValueVector& totals) const {
    const auto k = static_cast<std::size_t>(totals.size());
    if (thresholds.size() + 1 != k) throw ContractError("success criterion needs K-1 thresholds");
    std::vector<bool> out(k);
    for (std::size_t i = 0; i + 1 < k; ++i) out[i] = totals[static_cast<Eigen::Index>(i)] >= thresholds[i];
    out[k - 1] = totals[static_cast<Eigen::Index>(k - 1)] >= last_level;
    return out;
}

bool SuccessCriterion::success(const ValueVector& totals, bool terminated) const {
    if (require_terminal && !terminated) return false;
    const auto sat = satisfied(totals);
    for (std::size_t i = 0; i + 1 < sat.size(); ++i)
        if (!sat[i]) return false;
    return !include_last || sat.back();
}

PolicyEval evaluate_policy(const TabularMomdp& env, const StochasticPolicy& policy,
                           const SuccessCriterion& criterion, std::size_t episodes, std::uint64_t seed,
                           std::size_t horizon) {
    PolicyEval ev;
    ev.episodes = episodes;
    ev.mean_return = ValueVector::Zero(static_cast<Eigen::Index>(env.num_objectives()));
    Rng rng = make_rng(seed, 0x6576616c);
    std::size_t ok = 0, reached = 0;
    for (std::size_t e = 0; e < episodes; ++e) {
        const Trajectory t = rollout(env, policy, rng, horizon);
        const ValueVector f = episode_return(t, 1.0, env.num_objectives());
        ev.mean_return += f;
        ok += criterion.success(f, t.terminated) ? 1 : 0;
        reached += t.terminated ? 1 : 0;
    }
    if (episodes > 0) {
        const auto n = static_cast<double>(episodes);
        ev.success_rate = static_cast<double>(ok) / n;
        ev.goal_rate = static_cast<double>(reached) / n;
        ev.mean_return /= n;
    }
    return ev;
}

}  // namespace tlo
