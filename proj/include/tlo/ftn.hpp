#pragma once

#include <cstdint>
#include <vector>

#include "tlo/lmdp.hpp"

namespace tlo {

// Full binary tree; nodes in heap order, action 0 descends left, 1 right.
struct FtnSpec {
    int depth = 5;
    std::size_t reward_dim = 6;
    std::uint64_t seed = 0;
    std::uint64_t draw = 0;  // attempts consumed before the target became unique
    std::size_t target_leaf = 0;
    std::vector<ValueVector> leaf_rewards;
    ThresholdVector thresholds;

    std::size_t num_leaves() const { return std::size_t{1} << depth; }
    std::size_t num_nodes() const { return (std::size_t{1} << (depth + 1)) - 1; }
    StateId leaf_state(std::size_t leaf) const { return num_leaves() - 1 + leaf; }
    bool is_leaf(StateId s) const { return s + 1 >= num_leaves(); }
    std::size_t leaf_of(StateId s) const { return s - (num_leaves() - 1); }
    // Actions leading from the root to the leaf.
    std::vector<ActionId> path_to(std::size_t leaf) const;
};

// Unit-norm leaf rewards with uniform [0,1] components; thresholds are the
// target's first reward_dim-1 components minus margin. Redraws until the
// target is the unique best leaf under the thresholded order.
FtnSpec make_ftn_spec(int depth, std::uint64_t seed, std::size_t target_leaf, double margin = 1e-3);

bool ftn_target_unique(const FtnSpec& spec);

TabularMomdp ftn_env(const FtnSpec& spec, double gamma = 0.99);

}  // namespace tlo
