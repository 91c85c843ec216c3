#include "tlo/ftn.hpp"

#include "tlo/errors.hpp"

namespace tlo {

std::vector<ActionId> FtnSpec::path_to(std::size_t leaf) const {
    std::vector<ActionId> path(static_cast<std::size_t>(depth));
    for (int i = depth - 1; i >= 0; --i) {
        path[static_cast<std::size_t>(i)] = leaf & 1u;
        leaf >>= 1;
    }
    return path;
}

bool ftn_target_unique(const FtnSpec& spec) {
    const ValueVector& t = spec.leaf_rewards[spec.target_leaf];
    for (std::size_t l = 0; l < spec.num_leaves(); ++l)
        if (l != spec.target_leaf &&
            lex_compare(t, spec.leaf_rewards[l], spec.thresholds) != Ordering::Greater)
            return false;
    return true;
}

FtnSpec make_ftn_spec(int depth, std::uint64_t seed, std::size_t target_leaf, double margin) {
    if (depth < 1 || depth > 16) throw ContractError("FTN depth must lie in [1, 16]");
    FtnSpec spec;
    spec.depth = depth;
    spec.seed = seed;
    spec.target_leaf = target_leaf;
    if (target_leaf >= spec.num_leaves()) throw ContractError("FTN target leaf out of range");
    const auto dim = static_cast<Eigen::Index>(spec.reward_dim);
    for (spec.draw = 0; spec.draw < 10000; ++spec.draw) {
        Rng rng = make_rng(seed, spec.draw);
        spec.leaf_rewards.clear();
        for (std::size_t l = 0; l < spec.num_leaves(); ++l) {
            ValueVector r(dim);
            for (Eigen::Index i = 0; i < dim; ++i) r[i] = uniform01(rng);
            spec.leaf_rewards.push_back(r / r.norm());
        }
        const ValueVector& t = spec.leaf_rewards[target_leaf];
        std::vector<double> tau(spec.reward_dim - 1);
        for (std::size_t i = 0; i + 1 < spec.reward_dim; ++i) tau[i] = t[static_cast<Eigen::Index>(i)] - margin;
        spec.thresholds = ThresholdVector(std::move(tau));
        if (ftn_target_unique(spec)) return spec;
    }
    throw RuntimeAbort("FTN generation: no draw made the target leaf unique");
}

TabularMomdp ftn_env(const FtnSpec& spec, double gamma) {
    MomdpBuilder b(spec.num_nodes(), 2, spec.reward_dim);
    b.gamma(gamma).initial(0);
    const ValueVector zero = ValueVector::Zero(static_cast<Eigen::Index>(spec.reward_dim));
    for (StateId s = 0; s < spec.num_nodes(); ++s) {
        if (spec.is_leaf(s)) {
            b.terminal(s);
            continue;
        }
        for (ActionId a = 0; a < 2; ++a) {
            const StateId child = 2 * s + 1 + a;
            b.transition(s, a, child, 1.0,
                         spec.is_leaf(child) ? spec.leaf_rewards[spec.leaf_of(child)] : zero);
        }
    }
    return b.build();
}

}  // namespace tlo
