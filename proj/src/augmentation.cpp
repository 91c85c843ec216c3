#include "tlo/augmentation.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "tlo/maze.hpp"

namespace tlo {

namespace {

constexpr double kQuantum = 1e-9;

long long quantize(double x) {
    if (std::isinf(x)) return x > 0 ? LLONG_MAX : LLONG_MIN;
    return std::llround(x / kQuantum);
}

struct Key {
    StateId s;
    std::vector<long long> c;
    friend auto operator<=>(const Key&, const Key&) = default;
};

double max_abs_reward(const TabularMomdp& m, std::size_t objective) {
    double out = 0.0;
    for (StateId s = 0; s < m.num_states(); ++s)
        for (ActionId a = 0; a < m.num_actions(); ++a)
            for (const auto& o : m.outcomes(s, a)) out = std::max(out, std::abs(o.reward[objective]));
    return out;
}

struct Range {
    double lo;
    double hi;
    double clamp(double x) const { return std::isinf(x) ? x : std::clamp(x, lo, hi); }
};

double min_budget(const std::vector<double>& c) {
    return c.empty() ? std::numeric_limits<double>::infinity() : *std::min_element(c.begin(), c.end());
}

}  // namespace

bool AugmentedMdp::within_budget(StateId aug) const {
    return std::all_of(budget[aug].begin(), budget[aug].end(), [](double c) { return c >= 0.0; });
}

StateId AugmentedMdp::successor(StateId aug, ActionId a, std::size_t outcome) const {
    return mdp.outcomes(aug, a).at(outcome).next;
}

AugmentedMdp augment(const TabularMomdp& base, std::span<const std::size_t> tracked,
                     std::span<const double> thresholds, const AugmentOptions& opts) {
    const std::size_t k = base.num_objectives();
    if (tracked.size() != thresholds.size()) throw ContractError("one threshold per tracked objective");
    if (!(opts.lambda > 0.0)) throw ContractError("lambda must be positive");
    AugmentedMdp aug;
    aug.payoff_objective = opts.payoff_objective.value_or(k - 1);
    if (aug.payoff_objective >= k) throw ContractError("payoff objective out of range");
    for (std::size_t j : tracked) {
        if (j >= k) throw ContractError("tracked objective out of range");
        if (j == aug.payoff_objective) throw ContractError("payoff objective cannot be tracked");
    }
    aug.tracked.assign(tracked.begin(), tracked.end());
    aug.thresholds.assign(thresholds.begin(), thresholds.end());
    aug.lambda = opts.lambda;
    aug.layout = opts.layout;
    aug.horizon = opts.horizon;
    const double horizon = static_cast<double>(opts.horizon);
    const double payoff_bound = max_abs_reward(base, aug.payoff_objective);
    aug.c_l = horizon * payoff_bound + 1.0;

    const std::size_t m = tracked.size();
    std::vector<double> c0(m);
    std::vector<Range> ranges(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (std::isnan(thresholds[j]) || thresholds[j] == std::numeric_limits<double>::infinity())
            throw ContractError("threshold must be a number below +inf");
        c0[j] = -thresholds[j];
        const double span = horizon * max_abs_reward(base, tracked[j]);
        ranges[j] = {c0[j] - span, c0[j] + span};
    }
    const bool accumulate = opts.layout == PayoffLayout::AccumulatedPayoff;
    const Range payoff_range{-horizon * payoff_bound, horizon * payoff_bound};

    std::map<Key, StateId> index;
    std::deque<StateId> frontier;
    auto intern = [&](StateId s, std::vector<double> c, double p) {
        Key key{s, {}};
        for (double x : c) key.c.push_back(quantize(x));
        if (accumulate) key.c.push_back(quantize(p));
        auto [it, fresh] = index.try_emplace(std::move(key), aug.base_state.size());
        if (fresh) {
            if (aug.base_state.size() >= opts.max_states)
                throw UnsupportedConfiguration(fmt::format(
                    "augmented state space exceeds {} states; accumulator grid too large", opts.max_states));
            aug.base_state.push_back(s);
            aug.budget.push_back(std::move(c));
            aug.accumulated_payoff.push_back(p);
            frontier.push_back(it->second);
        }
        return it->second;
    };

    struct Edge {
        StateId from;
        ActionId a;
        StateId to;
        double p;
        double r;
    };
    std::vector<Edge> edges;
    intern(base.initial_state(), c0, 0.0);
    while (!frontier.empty()) {
        const StateId x = frontier.front();
        frontier.pop_front();
        const StateId s = aug.base_state[x];
        if (base.is_terminal(s)) continue;
        for (ActionId a = 0; a < base.num_actions(); ++a) {
            for (const auto& o : base.outcomes(s, a)) {
                std::vector<double> c = aug.budget[x];
                for (std::size_t j = 0; j < m; ++j) c[j] = ranges[j].clamp(c[j] + o.reward[tracked[j]]);
                const double pay = o.reward[aug.payoff_objective];
                const double acc = accumulate ? payoff_range.clamp(aug.accumulated_payoff[x] + pay) : 0.0;
                const bool terminal = base.is_terminal(o.next);
                const double worst = min_budget(c);
                double r = 0.0;
                switch (opts.layout) {
                    case PayoffLayout::TerminalPayoff:
                        r = !terminal ? 0.0 : (worst >= 0.0 ? pay : opts.lambda * worst);
                        break;
                    case PayoffLayout::AccumulatedPayoff:
                        r = !terminal ? 0.0 : (worst >= 0.0 ? acc : opts.lambda * worst);
                        break;
                    case PayoffLayout::ShapedPayoff:
                        r = (!terminal || worst >= 0.0) ? pay : opts.lambda * worst - aug.c_l;
                        break;
                }
                const StateId y = intern(o.next, std::move(c), acc);
                edges.push_back({x, a, y, o.probability, r});
            }
        }
    }

    MomdpBuilder b(aug.base_state.size(), base.num_actions(), 1);
    b.gamma(opts.gamma).initial(0);
    for (StateId x = 0; x < aug.base_state.size(); ++x)
        if (base.is_terminal(aug.base_state[x])) b.terminal(x);
    ValueVector r(1);
    for (const auto& e : edges) {
        r[0] = e.r;
        b.transition(e.from, e.a, e.to, e.p, r);
    }
    aug.mdp = b.build();

    aug.budget_grid.assign(m, {});
    for (std::size_t j = 0; j < m; ++j) {
        std::set<double> values;
        for (const auto& c : aug.budget) values.insert(c[j]);
        aug.budget_grid[j].assign(values.begin(), values.end());
    }
    return aug;
}

AugmentedMdp augment_single(const TabularMomdp& base, std::size_t constrained, double threshold,
                            const AugmentOptions& opts) {
    AugmentOptions o = opts;
    if (!o.payoff_objective && base.num_objectives() == 2) o.payoff_objective = 1 - constrained;
    const std::size_t tracked[] = {constrained};
    const double tau[] = {threshold};
    return augment(base, tracked, tau, o);
}

double augmented_return(const AugmentedMdp& aug, std::span<const ActionId> actions) {
    StateId x = aug.mdp.initial_state();
    double total = 0.0;
    for (ActionId a : actions) {
        const auto& outs = aug.mdp.outcomes(x, a);
        if (outs.size() != 1) throw ContractError("augmented_return needs deterministic transitions");
        total += outs.front().reward[0];
        x = outs.front().next;
    }
    return total;
}

ValueVector ordered_totals(const TabularMomdp& base, const AugmentedMdp& aug, std::span<const ActionId> actions) {
    ValueVector sum = ValueVector::Zero(static_cast<Eigen::Index>(base.num_objectives()));
    StateId s = base.initial_state();
    for (ActionId a : actions) {
        const auto& outs = base.outcomes(s, a);
        if (outs.size() != 1) throw ContractError("ordered_totals needs deterministic transitions");
        sum += outs.front().reward;
        s = outs.front().next;
    }
    ValueVector out(static_cast<Eigen::Index>(aug.tracked.size() + 1));
    for (std::size_t j = 0; j < aug.tracked.size(); ++j) out[static_cast<Eigen::Index>(j)] = sum[aug.tracked[j]];
    out[static_cast<Eigen::Index>(aug.tracked.size())] = sum[aug.payoff_objective];
    return out;
}

bool ordering_preserved(const TabularMomdp& base, const AugmentedMdp& aug, std::span<const ActionId> first,
                        std::span<const ActionId> second) {
    const ThresholdVector tau(aug.thresholds);
    const Ordering original = lex_compare(ordered_totals(base, aug, first), ordered_totals(base, aug, second), tau);
    const double a = augmented_return(aug, first);
    const double b = augmented_return(aug, second);
    const int scalar = a > b ? 1 : (a < b ? -1 : 0);
    return sign(original) == scalar;
}

std::vector<std::vector<ActionId>> terminating_sequences(const TabularMomdp& base, std::size_t max_length) {
    if (!base.is_deterministic()) throw ContractError("terminating_sequences needs deterministic transitions");
    std::vector<std::vector<ActionId>> out;
    std::vector<ActionId> prefix;
    auto walk = [&](auto&& self, StateId s) -> void {
        if (prefix.size() == max_length) return;
        for (ActionId a = 0; a < base.num_actions(); ++a) {
            const StateId next = base.outcomes(s, a).front().next;
            prefix.push_back(a);
            if (base.is_terminal(next)) out.push_back(prefix);
            else self(self, next);
            prefix.pop_back();
        }
    };
    if (!base.is_terminal(base.initial_state())) walk(walk, base.initial_state());
    return out;
}

OrderingReport ordering_check(const TabularMomdp& base, const AugmentedMdp& aug, std::size_t max_length) {
    const auto seqs = terminating_sequences(base, max_length);
    const ThresholdVector tau(aug.thresholds);
    std::vector<ValueVector> totals;
    std::vector<double> scalar;
    totals.reserve(seqs.size());
    scalar.reserve(seqs.size());
    for (const auto& q : seqs) {
        totals.push_back(ordered_totals(base, aug, q));
        scalar.push_back(augmented_return(aug, q));
    }
    OrderingReport r;
    r.trajectories = seqs.size();
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        for (std::size_t j = 0; j < seqs.size(); ++j) {
            const int lex = sign(lex_compare(totals[i], totals[j], tau));
            const int sc = scalar[i] > scalar[j] ? 1 : (scalar[i] < scalar[j] ? -1 : 0);
            ++r.pairs;
            if (lex == sc) ++r.agreements;
        }
    }
    return r;
}

AugmentedSolution solve_augmented(const AugmentedMdp& aug, double tol, std::size_t max_sweeps) {
    const ValueIterationResult vi = optimal_q(aug.mdp, 0, tol, max_sweeps);
    if (!vi.converged)
        throw RuntimeAbort(fmt::format("value iteration on the augmented MDP did not converge in {} sweeps",
                                       vi.sweeps));
    AugmentedSolution sol;
    sol.sweeps = vi.sweeps;
    const auto n = static_cast<Eigen::Index>(aug.num_states());
    sol.value.resize(n);
    sol.policy.resize(aug.num_states());
    for (Eigen::Index x = 0; x < n; ++x) {
        Eigen::Index best = 0;
        sol.value[x] = vi.q.row(x).maxCoeff(&best);
        sol.policy[static_cast<std::size_t>(x)] = static_cast<ActionId>(best);
    }
    return sol;
}

double satisfaction_probability(const AugmentedMdp& aug, const std::vector<ActionId>& policy) {
    const std::size_t horizon = aug.horizon;
    std::map<StateId, double> dist{{aug.mdp.initial_state(), 1.0}};
    double success = 0.0;
    for (std::size_t t = 0; t < horizon && !dist.empty(); ++t) {
        std::map<StateId, double> next;
        for (const auto& [x, p] : dist) {
            for (const auto& o : aug.mdp.outcomes(x, policy.at(x))) {
                const double q = p * o.probability;
                if (aug.mdp.is_terminal(o.next)) {
                    if (aug.within_budget(o.next)) success += q;
                } else {
                    next[o.next] += q;
                }
            }
        }
        dist = std::move(next);
    }
    return success;
}

std::vector<StateId> follow_policy(const AugmentedMdp& aug, const std::vector<ActionId>& policy) {
    StateId x = aug.mdp.initial_state();
    std::vector<StateId> path{aug.base_state[x]};
    for (std::size_t t = 0; t < aug.horizon && !aug.mdp.is_terminal(x); ++t) {
        const auto& outs = aug.mdp.outcomes(x, policy.at(x));
        if (outs.size() != 1) throw ContractError("follow_policy needs deterministic transitions");
        x = outs.front().next;
        path.push_back(aug.base_state[x]);
    }
    return path;
}

ConstraintSearchResult constraint_search(const TabularMomdp& base, const ThresholdVector& tau, SearchStrategy strategy,
                                         AugmentOptions opts) {
    const std::size_t k = base.num_objectives();
    if (tau.size() + 1 != k) throw ContractError("constraint_search needs K-1 thresholds");
    opts.layout = PayoffLayout::ShapedPayoff;
    opts.payoff_objective = k - 1;

    ConstraintSearchResult res;
    auto attempt = [&](std::size_t i) -> bool {
        std::vector<std::size_t> tracked;
        std::vector<double> thresholds;
        for (std::size_t j = 0; j < i; ++j) {
            if (tau[j] == -std::numeric_limits<double>::infinity()) continue;
            tracked.push_back(j);
            thresholds.push_back(tau[j]);
        }
        ++res.solver_calls;
        AugmentedMdp aug = augment(base, tracked, thresholds, opts);
        AugmentedSolution sol;
        try {
            sol = solve_augmented(aug);
        } catch (const RuntimeAbort& e) {
            throw ConstraintSearchError(fmt::format("{} (checking {} constraints)", e.what(), i), res);
        }
        if (satisfaction_probability(aug, sol.policy) < 1.0 - 1e-9) return false;
        res.satisfiable = i;
        res.witness_mdp = std::move(aug);
        res.witness_policy = std::move(sol.policy);
        return true;
    };

    const std::size_t constraints = k - 1;
    if (strategy == SearchStrategy::Linear) {
        attempt(0);
        for (std::size_t i = 1; i <= constraints; ++i)
            if (!attempt(i)) break;
    } else {
        attempt(0);
        std::size_t lo = 0;
        std::size_t hi = constraints;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (attempt(mid)) lo = mid;
            else hi = mid - 1;
        }
        if (res.satisfiable != lo) attempt(lo);
    }
    return res;
}

TabularMomdp permute_objectives(const TabularMomdp& base, std::span<const std::size_t> order) {
    const std::size_t k = base.num_objectives();
    std::vector<std::size_t> sorted(order.begin(), order.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> identity(k);
    std::iota(identity.begin(), identity.end(), 0);
    if (sorted != identity) throw ContractError("objective order must be a permutation");
    MomdpBuilder b(base.num_states(), base.num_actions(), k);
    b.gamma(base.gamma()).initial(base.initial_state());
    for (StateId s : base.terminal_states()) b.terminal(s);
    ValueVector r(static_cast<Eigen::Index>(k));
    for (StateId s = 0; s < base.num_states(); ++s) {
        if (base.is_terminal(s)) continue;
        for (ActionId a = 0; a < base.num_actions(); ++a)
            for (const auto& o : base.outcomes(s, a)) {
                for (std::size_t i = 0; i < k; ++i) r[static_cast<Eigen::Index>(i)] = o.reward[order[i]];
                b.transition(s, a, o.next, o.probability, r);
            }
    }
    return b.build();
}

TabularMomdp maze_small_budget_variant(double gamma) {
    MazeSpec spec = builtin_maze("maze-small");
    spec.scheme = ObjectiveScheme::EndpointPrimary;
    const std::size_t order[] = {1, 0};
    return permute_objectives(maze_to_momdp(spec, gamma), order);
}

}  // namespace tlo
