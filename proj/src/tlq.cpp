#include "tlo/tlq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "tlo/errors.hpp"

namespace tlo {

VectorQTable::VectorQTable(std::size_t states, std::size_t actions, std::size_t objectives,
                           TlqVariant variant)
    : states_(states), actions_(actions), variant_(variant) {
    if (states == 0 || actions == 0 || objectives == 0) throw ContractError("empty Q table");
    tables_.assign(objectives, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states),
                                                     static_cast<Eigen::Index>(actions)));
}

bool VectorQTable::all_finite() const {
    return std::all_of(tables_.begin(), tables_.end(), [](const auto& t) { return t.allFinite(); });
}

ActionSet all_actions(std::size_t n) {
    ActionSet a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = i;
    return a;
}

ActionId argmax_over(const VectorQTable& q, std::size_t objective, StateId s, const ActionSet& set) {
    if (set.empty()) throw ContractError("argmax over an empty action set");
    ActionId best = set.front();
    for (ActionId a : set)
        if (q(objective, s, a) > q(objective, s, best)) best = a;
    return best;
}

namespace {

double filter_param(const Filter& f, std::size_t i) {
    if (i >= f.params.size())
        throw ContractError(fmt::format("filter has no parameter for objective {}", i + 1));
    return f.params[i];
}

Filter loosen(const Filter& f, double buffer) {
    Filter g = f;
    for (double& p : g.params) {
        if (f.kind == FilterKind::AbsoluteThreshold) p -= buffer;
        else if (f.kind == FilterKind::AbsoluteSlack) p += buffer;
    }
    return g;
}

ActionSet acceptable_impl(StateId s, const VectorQTable& q, const ActionSet& prev, std::size_t i,
                          const Filter& filter, double extra_slack) {
    if (prev.empty()) throw ContractError("acceptable_actions: empty previous set");
    const double p = filter_param(filter, i);
    double best = -std::numeric_limits<double>::infinity();
    for (ActionId a : prev) best = std::max(best, q(i, s, a));
    double cutoff = 0.0;
    switch (filter.kind) {
        case FilterKind::AbsoluteThreshold: cutoff = p; break;
        case FilterKind::AbsoluteSlack: cutoff = best - p; break;
        case FilterKind::RelativeSlack: cutoff = (1.0 - p) * best - extra_slack; break;
    }
    ActionSet out;
    for (ActionId a : prev)
        if (q(i, s, a) >= cutoff) out.push_back(a);
    if (out.empty())
        for (ActionId a : prev)
            if (q(i, s, a) == best) out.push_back(a);
    return out;
}

}  // namespace

ActionSet acceptable_actions(StateId s, const VectorQTable& q, const ActionSet& prev,
                             std::size_t objective, const Filter& filter) {
    return acceptable_impl(s, q, prev, objective, filter, 0.0);
}

ActionSet acceptable_chain(StateId s, const VectorQTable& q, std::size_t upto, const Filter& filter) {
    ActionSet set = all_actions(q.num_actions());
    for (std::size_t i = 0; i < upto && set.size() > 1; ++i) set = acceptable_actions(s, q, set, i, filter);
    return set;
}

ActionId greedy_action(StateId s, const VectorQTable& q, const Filter& filter) {
    const std::size_t k = q.num_objectives();
    ActionSet set = all_actions(q.num_actions());
    for (std::size_t o = 0; o < k; ++o) {
        if (set.size() > 1 && o + 1 < k) {
            set = acceptable_actions(s, q, set, o, filter);
        } else {
            return argmax_over(q, o, s, set);
        }
    }
    return set.front();
}

ActionId select_action(StateId s, const VectorQTable& q, double epsilon, const Filter& filter, Rng& rng) {
    if (epsilon > 0.0 && bernoulli(rng, epsilon)) return uniform_index(rng, q.num_actions());
    return greedy_action(s, q, filter);
}

ActionId cyclic_select_action(StateId s, const VectorQTable& q, const Filter& filter) {
    if (q.num_objectives() != 2) throw UnsupportedConfiguration("cyclic selection needs exactly two objectives");
    const ActionSet a0 = all_actions(q.num_actions());
    const ActionSet a1 = acceptable_actions(s, q, a0, 0, filter);
    if (a1.size() <= 1) return argmax_over(q, 0, s, a1);
    const ActionSet a2 = acceptable_actions(s, q, a1, 1, filter);
    if (a2.size() <= 1) return argmax_over(q, 1, s, a1);
    return argmax_over(q, 0, s, a2);
}

namespace {

void check_transition(const VectorQTable& q, const SampledTransition& t) {
    if (static_cast<std::size_t>(t.reward.size()) != q.num_objectives())
        throw ContractError("transition reward length differs from objective count");
}

double bootstrap(const VectorQTable& q, std::size_t i, const SampledTransition& t, const Filter& filter) {
    if (t.terminal) return 0.0;
    return q(i, t.next, argmax_over(q, i, t.next, acceptable_chain(t.next, q, i, filter)));
}

void blend(VectorQTable& q, const SampledTransition& t, const std::vector<double>& targets, double lr) {
    for (std::size_t i = 0; i < targets.size(); ++i)
        q(i, t.s, t.a) = (1.0 - lr) * q(i, t.s, t.a) + lr * targets[i];
}

}  // namespace

void tlq_update_gabor(VectorQTable& q, const SampledTransition& t, const Filter& filter,
                      const ThresholdVector& tau, double lr, double gamma) {
    check_transition(q, t);
    const std::size_t k = q.num_objectives();
    if (tau.size() + 1 != k) throw ContractError("Gabor update needs K-1 thresholds");
    std::vector<double> targets(k);
    for (std::size_t i = 0; i < k; ++i) {
        targets[i] = t.reward[static_cast<Eigen::Index>(i)] + gamma * bootstrap(q, i, t, filter);
        if (i + 1 < k) targets[i] = std::min(tau[i], targets[i]);
    }
    blend(q, t, targets, lr);
}

void tlq_update_li(VectorQTable& q, const SampledTransition& t, const Filter& filter, double lr,
                   double gamma) {
    check_transition(q, t);
    std::vector<double> targets(q.num_objectives());
    for (std::size_t i = 0; i < targets.size(); ++i)
        targets[i] = t.reward[static_cast<Eigen::Index>(i)] + gamma * bootstrap(q, i, t, filter);
    blend(q, t, targets, lr);
}

namespace {

ActionId informed_action(const VectorQTable& q, StateId s, const Filter& filter, double buffer) {
    ActionSet wide = all_actions(q.num_actions());
    if (!std::isinf(buffer)) {
        const Filter f = loosen(filter, buffer);
        wide = acceptable_impl(s, q, wide, 0, f, filter.kind == FilterKind::RelativeSlack ? buffer : 0.0);
    }
    return argmax_over(q, 1, s, wide);
}

}  // namespace

void tlq_update_informed(VectorQTable& q, const SampledTransition& t, const Filter& filter,
                         double buffer, double lr, double gamma) {
    if (q.num_objectives() != 2) throw UnsupportedConfiguration("informed targets are defined for two objectives only");
    check_transition(q, t);
    if (!(buffer >= 0.0)) throw ContractError("informed-target buffer must be non-negative");
    std::vector<double> targets(2);
    const double boot1 = t.terminal ? 0.0 : q(0, t.next, informed_action(q, t.next, filter, buffer));
    targets[0] = t.reward[0] + gamma * boot1;
    targets[1] = t.reward[1] + gamma * bootstrap(q, 1, t, filter);
    blend(q, t, targets, lr);
}

namespace {

ActionId behaviour_action(StateId s, const VectorQTable& q, const TlqConfig& cfg, double epsilon, Rng& rng) {
    if (cfg.cyclic_selection) {
        if (epsilon > 0.0 && bernoulli(rng, epsilon)) return uniform_index(rng, q.num_actions());
        return cyclic_select_action(s, q, cfg.filter);
    }
    return select_action(s, q, epsilon, cfg.filter, rng);
}

void apply_update(VectorQTable& q, const SampledTransition& t, const TlqConfig& cfg, double lr, double gamma) {
    if (cfg.rule == UpdateRule::Informed) {
        tlq_update_informed(q, t, cfg.filter, cfg.buffer, lr, gamma);
    } else if (cfg.variant == TlqVariant::GaborRectified) {
        tlq_update_gabor(q, t, cfg.filter, cfg.thresholds, lr, gamma);
    } else {
        tlq_update_li(q, t, cfg.filter, lr, gamma);
    }
}

}  // namespace

std::vector<ActionId> greedy_policy(const TabularMomdp& env, const VectorQTable& q, const TlqConfig& cfg) {
    std::vector<ActionId> pi(env.num_states(), 0);
    Rng unused(0);
    for (StateId s = 0; s < env.num_states(); ++s)
        if (!env.is_terminal(s)) pi[s] = behaviour_action(s, q, cfg, 0.0, unused);
    return pi;
}

TlqEvalStats evaluate_greedy(const TabularMomdp& env, const std::vector<ActionId>& policy,
                             std::size_t episodes, std::size_t horizon, std::uint64_t seed) {
    TlqEvalStats st;
    st.mean_return = ValueVector::Zero(static_cast<Eigen::Index>(env.num_objectives()));
    Rng rng = make_rng(seed, 0x6576616c);
    std::size_t reached = 0;
    for (std::size_t e = 0; e < episodes; ++e) {
        const Trajectory t = rollout(env, [&](StateId s, Rng&) { return policy[s]; }, rng, horizon);
        reached += t.terminated ? 1 : 0;
        st.mean_return += episode_return(t, 1.0, env.num_objectives());
    }
    if (episodes > 0) {
        st.goal_rate = static_cast<double>(reached) / static_cast<double>(episodes);
        st.mean_return /= static_cast<double>(episodes);
    }
    return st;
}

TlqResult train_tlq(const TabularMomdp& env, const TlqConfig& cfg, std::uint64_t seed) {
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw ContractError("epsilon must lie in [0, 1]");
    if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) throw ContractError("learning rate must lie in (0, 1]");
    TlqResult res{VectorQTable(env.num_states(), env.num_actions(), env.num_objectives(), cfg.variant), {}, {}, {}, 0};
    Rng rng = make_rng(seed, 0x746c71);
    std::vector<ActionId> last;
    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        StateId s = env.initial_state();
        for (std::size_t step = 0; step < cfg.horizon && !env.is_terminal(s); ++step) {
            const ActionId a = behaviour_action(s, res.q, cfg, cfg.epsilon, rng);
            const Outcome& o = env.outcomes(s, a)[env.sample(s, a, rng)];
            apply_update(res.q, {s, a, o.next, o.reward, env.is_terminal(o.next)}, cfg, cfg.learning_rate, env.gamma());
            s = o.next;
        }
        if (!res.q.all_finite())
            throw RuntimeAbort(fmt::format("train_tlq: non-finite Q value after episode {}", ep + 1));
        if (cfg.stats_every > 0 && ((ep + 1) % cfg.stats_every == 0 || ep + 1 == cfg.episodes)) {
            auto pi = greedy_policy(env, res.q, cfg);
            const auto st = evaluate_greedy(env, pi, cfg.eval_episodes, cfg.horizon, seed);
            res.history.push_back({ep + 1, st.goal_rate, st.mean_return});
            if (!last.empty())
                for (StateId x = 0; x < pi.size(); ++x) res.policy_changes += pi[x] != last[x] ? 1 : 0;
            last = std::move(pi);
        }
    }
    res.greedy_policy = greedy_policy(env, res.q, cfg);
    res.stats = evaluate_greedy(env, res.greedy_policy, cfg.eval_episodes, cfg.horizon, seed);
    return res;
}

void write_tlq_history_csv(std::ostream& os, const TlqResult& r) {
    os << "# tlq-history v1\n";
    os << "episode,goal_rate";
    const auto k = r.q.num_objectives();
    for (std::size_t i = 0; i < k; ++i) os << ",mean_return_" << i + 1;
    os << '\n';
    for (const auto& row : r.history) {
        os << row.episode << ',' << fmt::format("{:.17g}", row.goal_rate);
        for (Eigen::Index i = 0; i < row.mean_return.size(); ++i) os << ',' << fmt::format("{:.17g}", row.mean_return[i]);
        os << '\n';
    }
}

TlqSweepResult tlq_value_iteration(const TabularMomdp& env, const TlqConfig& cfg, double tol,
                                   std::size_t max_sweeps) {
    const std::size_t k = env.num_objectives();
    TlqSweepResult res{VectorQTable(env.num_states(), env.num_actions(), k, cfg.variant), 0, false};
    VectorQTable next = res.q;
    for (res.sweeps = 0; res.sweeps < max_sweeps;) {
        for (StateId s = 0; s < env.num_states(); ++s) {
            if (env.is_terminal(s)) continue;
            for (ActionId a = 0; a < env.num_actions(); ++a) {
                for (std::size_t i = 0; i < k; ++i) next(i, s, a) = 0.0;
                for (const auto& o : env.outcomes(s, a)) {
                    VectorQTable scratch = res.q;
                    apply_update(scratch, {s, a, o.next, o.reward, env.is_terminal(o.next)}, cfg, 1.0, env.gamma());
                    for (std::size_t i = 0; i < k; ++i) next(i, s, a) += o.probability * scratch(i, s, a);
                }
            }
        }
        double change = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            change = std::max(change, (next.table(i) - res.q.table(i)).cwiseAbs().maxCoeff());
        std::swap(res.q, next);
        ++res.sweeps;
        if (!res.q.all_finite()) throw RuntimeAbort("tlq_value_iteration: non-finite Q value");
        if (change < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

std::optional<Interval> slack_feasibility_maze_small(double gamma, double goal_reward) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ContractError("gamma must lie in (0, 1)");
    if (!(goal_reward > 0.0)) throw ContractError("goal reward must be positive");
    const Interval iv{goal_reward * gamma * (1.0 - gamma * gamma), goal_reward * (1.0 - gamma)};
    if (iv.lo < iv.hi) return iv;
    return std::nullopt;
}

namespace {

MazeSpec small_maze(double goal_reward) {
    MazeSpec m = builtin_maze("maze-small");
    m.goal_reward = goal_reward;
    m.scheme = ObjectiveScheme::EndpointPrimary;
    return m;
}

}  // namespace

bool slack_detour_acceptable(double gamma, double delta, double goal_reward) {
    const MazeSpec m = small_maze(goal_reward);
    const TabularMomdp env = maze_to_momdp(m, gamma);
    const auto vi = optimal_q(env, 0);
    VectorQTable q(env.num_states(), env.num_actions(), 2);
    q.table(0) = vi.q;
    const Filter f{FilterKind::AbsoluteSlack, {delta}};
    const ActionSet all = all_actions(kMazeActions);
    const auto at_start = acceptable_actions(m.state({1, 0}), q, all, 0, f);
    const auto near_goal = acceptable_actions(m.state({2, 2}), q, all, 0, f);
    const auto right = static_cast<ActionId>(MazeAction::Right);
    const auto left = static_cast<ActionId>(MazeAction::Left);
    return std::find(at_start.begin(), at_start.end(), right) != at_start.end() &&
           near_goal == ActionSet{left};
}

std::vector<StateId> maze_small_pareto_path() {
    const MazeSpec m = builtin_maze("maze-small");
    return {m.state({1, 0}), m.state({2, 0}), m.state({2, 1}), m.state({2, 2}), m.state({1, 2})};
}

namespace {

struct Outcome3 {
    bool reached;
    std::size_t hh;
    bool pareto;
    ValueVector ret;
};

Outcome3 classify(const TabularMomdp& env, const MazeSpec& m, const std::vector<ActionId>& pi) {
    Rng rng(0);
    const Trajectory t = rollout(env, [&](StateId s, Rng&) { return pi[s]; }, rng, kDefaultHorizon);
    Outcome3 o{t.terminated, 0, t.states == maze_small_pareto_path(), episode_return(t, 1.0, 2)};
    for (std::size_t i = 1; i < t.states.size(); ++i)
        if (m.tile(m.cell(t.states[i])) == Tile::HighPenalty) ++o.hh;
    return o;
}

}  // namespace

FailureScanReport tlq_failure_scan(double gamma, std::size_t grid_points, double goal_reward) {
    const MazeSpec m = small_maze(goal_reward);
    const TabularMomdp env = maze_to_momdp(m, gamma);
    FailureScanReport rep;

    // Every deterministic policy on the non-terminal states.
    std::vector<StateId> free_states;
    for (StateId s = 0; s < env.num_states(); ++s)
        if (!env.is_terminal(s)) free_states.push_back(s);
    std::size_t total = 1;
    for (std::size_t i = 0; i < free_states.size(); ++i) total *= kMazeActions;
    std::vector<Outcome3> table(total);
    const ThresholdVector reach({goal_reward});
    std::vector<ActionId> pi(env.num_states(), 0);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (StateId s : free_states) {
            pi[s] = c % kMazeActions;
            c /= kMazeActions;
        }
        table[code] = classify(env, m, pi);
        if (table[code].pareto) ++rep.pareto_policies;
    }
    rep.pareto_path_lex_optimal = rep.pareto_policies > 0;
    for (const auto& a : table) {
        if (!a.pareto) continue;
        for (const auto& b : table)
            if (!b.pareto && lex_compare(a.ret, b.ret, reach) != Ordering::Greater) rep.pareto_path_lex_optimal = false;
        break;
    }

    auto encode = [&](const std::vector<ActionId>& p) {
        std::size_t code = 0, mult = 1;
        for (StateId s : free_states) {
            code += p[s] * mult;
            mult *= kMazeActions;
        }
        return code;
    };

    rep.enumeration_agrees = true;
    const double step = grid_points > 1 ? 1.0 / static_cast<double>(grid_points - 1) : 0.0;
    for (FilterKind kind : {FilterKind::AbsoluteThreshold, FilterKind::AbsoluteSlack, FilterKind::RelativeSlack}) {
        for (std::size_t g = 0; g < grid_points; ++g) {
            double param = goal_reward * step * static_cast<double>(g);
            if (kind == FilterKind::RelativeSlack)
                param = static_cast<double>(g + 1) / static_cast<double>(grid_points);
            TlqConfig cfg;
            cfg.filter = {kind, {param}};
            if (kind == FilterKind::AbsoluteThreshold) {
                cfg.variant = TlqVariant::GaborRectified;
                cfg.thresholds = ThresholdVector({param});
            }
            const auto vi = tlq_value_iteration(env, cfg);
            const auto gp = greedy_policy(env, vi.q, cfg);
            const Outcome3 o = classify(env, m, gp);
            const Outcome3& e = table[encode(gp)];
            if (e.reached != o.reached || e.hh != o.hh || e.pareto != o.pareto) rep.enumeration_agrees = false;
            rep.rows.push_back({kind, param, o.reached, o.hh, o.pareto, vi.sweeps});
            if (o.pareto) ++rep.pareto_configs;
        }
    }
    return rep;
}

void write_failure_scan_csv(std::ostream& os, const FailureScanReport& r) {
    os << "# tlq-failure-scan v1\n";
    os << "filter,parameter,reached_goal,hh_visits,pareto,sweeps\n";
    for (const auto& row : r.rows)
        os << to_string(row.filter) << ',' << fmt::format("{:.17g}", row.parameter) << ','
           << (row.reached_goal ? 1 : 0) << ',' << row.high_penalty_visits << ',' << (row.pareto ? 1 : 0) << ','
           << row.sweeps << '\n';
}

std::string to_string(FilterKind k) {
    switch (k) {
        case FilterKind::AbsoluteThreshold: return "absolute-threshold";
        case FilterKind::AbsoluteSlack: return "absolute-slack";
        case FilterKind::RelativeSlack: return "relative-slack";
    }
    return "?";
}

FilterKind filter_kind_from_string(const std::string& s) {
    if (s == "absolute-threshold") return FilterKind::AbsoluteThreshold;
    if (s == "absolute-slack") return FilterKind::AbsoluteSlack;
    if (s == "relative-slack") return FilterKind::RelativeSlack;
    throw ContractError("unknown filter '" + s + "'");
}

std::string to_string(TlqVariant v) { return v == TlqVariant::GaborRectified ? "gabor" : "li"; }

TlqVariant tlq_variant_from_string(const std::string& s) {
    if (s == "gabor") return TlqVariant::GaborRectified;
    if (s == "li") return TlqVariant::LiRaw;
    throw ContractError("unknown TLQ variant '" + s + "'");
}

}  // namespace tlo
