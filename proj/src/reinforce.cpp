#include "tlo/reinforce.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "tlo/errors.hpp"

namespace tlo {

EpisodeRecord sample_episode(const TabularMomdp& env, const PolicyNetwork& net, NetMode mode, Rng& rng,
                             std::size_t horizon) {
    EpisodeRecord ep;
    Trajectory& t = ep.trajectory;
    StateId s = env.initial_state();
    t.states.push_back(s);
    while (!env.is_terminal(s) && t.actions.size() < horizon) {
        Forward f = net.forward(s, mode, rng);
        const ActionId a = net.sample_action(f.probs, rng);
        const Outcome& o = env.outcomes(s, a)[env.sample(s, a, rng)];
        t.actions.push_back(a);
        t.rewards.push_back(o.reward);
        ep.masks.push_back(std::move(f.mask));
        s = o.next;
        t.states.push_back(s);
    }
    t.terminated = env.is_terminal(s);
    return ep;
}

EpisodeGradients episode_gradients(const PolicyNetwork& net, const EpisodeRecord& ep, double gamma,
                                   std::size_t objectives) {
    const Trajectory& t = ep.trajectory;
    const std::size_t n = t.length();
    const auto k = static_cast<Eigen::Index>(objectives);
    EpisodeGradients g;
    g.m.assign(objectives, Vec::Zero(static_cast<Eigen::Index>(net.parameter_count())));
    g.f = ValueVector::Zero(k);
    g.returns.assign(n, ValueVector::Zero(k));
    ValueVector running = ValueVector::Zero(k);
    for (std::size_t i = n; i-- > 0;) {
        running = t.rewards[i] + gamma * running;
        g.returns[i] = running;
        g.f += t.rewards[i];
    }
    std::vector<double> w(objectives);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t o = 0; o < objectives; ++o) w[o] = g.returns[i][static_cast<Eigen::Index>(o)];
        net.accumulate_grad_logprob(t.states[i], t.actions[i], ep.masks[i], w, g.m);
    }
    return g;
}

namespace {

void check_cone_contract(const EpisodeGradients& g, const DirectionResult& r, const DirectionConfig& cfg) {
    const double boundary = std::numbers::pi / 2 - cfg.delta + kAngleTolerance;
    const std::size_t k = g.m.size();
    for (std::size_t j = 0; j <= r.active; ++j) {
        if (j + 1 != k && cfg.active_constraints && g.f[static_cast<Eigen::Index>(j)] > cfg.thresholds[j] + cfg.buffer)
            continue;
        if (!(g.m[j].norm() > 0.0)) continue;
        if (angle_between(*r.direction, g.m[j]) > boundary)
            throw RuntimeAbort(fmt::format("update direction leaves the cone of objective {}", j + 1));
    }
}

class SatisfactionWindow {
public:
    SatisfactionWindow(std::size_t width, std::size_t objectives)
        : width_(width), sums_(objectives + 1, 0) {}

    void push(const std::vector<bool>& sat, bool joint) {
        std::vector<bool> row = sat;
        row.push_back(joint);
        for (std::size_t i = 0; i < row.size(); ++i) sums_[i] += row[i] ? 1 : 0;
        rows_.push_back(std::move(row));
        if (rows_.size() > width_) {
            for (std::size_t i = 0; i < rows_.front().size(); ++i) sums_[i] -= rows_.front()[i] ? 1 : 0;
            rows_.pop_front();
        }
    }

    double rate(std::size_t i) const {
        return static_cast<double>(sums_[i]) / static_cast<double>(rows_.size());
    }

private:
    std::size_t width_;
    std::vector<std::size_t> sums_;
    std::deque<std::vector<bool>> rows_;
};

SuccessCriterion resolve_criterion(const ReinforceConfig& cfg, std::size_t k) {
    SuccessCriterion c = cfg.success;
    if (c.thresholds.size() == 0 && k > 1) c.thresholds = cfg.direction.thresholds;
    return c;
}

bool all_finite(const Vec& v) { return v.allFinite(); }

template <class Step>
ReinforceResult train_loop(const TabularMomdp& env, const ReinforceConfig& cfg, std::uint64_t seed, Step&& step) {
    const std::size_t k = env.num_objectives();
    if (cfg.window == 0) throw ContractError("trace window must be positive");
    ReinforceResult res{PolicyNetwork(env.num_states(), env.num_actions(), cfg.hidden, cfg.dropout, cfg.temperature),
                        {}, 0, {}};
    Rng init = make_rng(seed, 1);
    res.policy.initialize(init);
    Rng rng = make_rng(seed, 2);
    Adam opt(res.policy.parameter_count(), cfg.adam);
    const SuccessCriterion crit = resolve_criterion(cfg, k);
    SatisfactionWindow window(cfg.window, k);
    res.trace.reserve(cfg.episodes);
    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        const EpisodeRecord rec = sample_episode(env, res.policy, NetMode::Train, rng, cfg.horizon);
        const EpisodeGradients g = episode_gradients(res.policy, rec, cfg.gamma, k);
        const std::optional<Vec> d = step(g);
        if (d) {
            opt.step(res.policy.parameters(), -*d);
            if (!all_finite(res.policy.parameters()))
                throw RuntimeAbort(fmt::format("non-finite policy parameters after episode {} (seed {})", ep + 1, seed));
        } else {
            ++res.skipped_updates;
        }
        window.push(crit.satisfied(g.f), crit.success(g.f, rec.trajectory.terminated));
        ReinforceTraceRow row{ep + 1, std::vector<double>(k), window.rate(k), d ? d->norm() : 0.0, !d};
        for (std::size_t i = 0; i < k; ++i) row.satisfaction[i] = window.rate(i);
        res.trace.push_back(std::move(row));
        if (cfg.on_episode) cfg.on_episode(ep + 1, res.policy);
    }
    res.eval = evaluate_network(env, res.policy, crit, cfg.eval_episodes, seed, cfg.horizon);
    return res;
}

}  // namespace

ReinforceResult reinforce_train(const TabularMomdp& env, const ReinforceConfig& cfg, std::uint64_t seed) {
    if (cfg.direction.thresholds.size() + 1 != env.num_objectives())
        throw ContractError("reinforce_train: need K-1 thresholds");
    return train_loop(env, cfg, seed, [&](const EpisodeGradients& g) -> std::optional<Vec> {
        DirectionResult r = find_direction_detailed(g.m, g.f, cfg.direction);
        if (r.direction && cfg.check_cones) check_cone_contract(g, r, cfg.direction);
        return std::move(r.direction);
    });
}

ReinforceResult vanilla_reinforce_train(const TabularMomdp& env, const ReinforceConfig& cfg, std::uint64_t seed) {
    if (env.num_objectives() != 1) throw ContractError("vanilla REINFORCE needs a single objective");
    return train_loop(env, cfg, seed, [](const EpisodeGradients& g) -> std::optional<Vec> { return g.m.front(); });
}

PolicyEval evaluate_network(const TabularMomdp& env, const PolicyNetwork& net, const SuccessCriterion& criterion,
                            std::size_t episodes, std::uint64_t seed, std::size_t horizon) {
    return evaluate_policy(
        env, [&](StateId s, Rng& rng) { return net.sample_action(net.probabilities(s), rng); }, criterion, episodes,
        seed, horizon);
}

double action_sequence_probability(const TabularMomdp& env, const PolicyNetwork& net,
                                   std::span<const ActionId> actions) {
    StateId s = env.initial_state();
    double p = 1.0;
    for (ActionId a : actions) {
        const auto& outs = env.outcomes(s, a);
        if (outs.size() != 1) throw ContractError("action_sequence_probability needs deterministic transitions");
        p *= net.probabilities(s)[static_cast<Eigen::Index>(a)];
        s = outs.front().next;
    }
    return p;
}

void write_rl_csv(std::ostream& os, const std::vector<ReinforceTraceRow>& trace) {
    os << "# rl-trace v1\n";
    os << "episode";
    const std::size_t k = trace.empty() ? 0 : trace.front().satisfaction.size();
    for (std::size_t i = 0; i < k; ++i) os << ",sat_" << i + 1;
    os << ",joint,dir_norm,skipped\n";
    for (const auto& r : trace) {
        os << r.episode;
        for (double s : r.satisfaction) os << ',' << fmt::format("{:.17g}", s);
        os << ',' << fmt::format("{:.17g}", r.joint) << ',' << fmt::format("{:.17g}", r.direction_norm) << ','
           << (r.skipped ? 1 : 0) << '\n';
    }
}

}  // namespace tlo
