#include "tlo/lmdp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "tlo/errors.hpp"

namespace tlo {

ThresholdVector::ThresholdVector(std::vector<double> tau) : tau_(std::move(tau)) {
    for (double t : tau_)
        if (std::isnan(t)) throw ContractError("threshold is NaN");
}

namespace {

void check_lengths(const ValueVector& u, const ThresholdVector& tau) {
    if (static_cast<std::size_t>(u.size()) != tau.size() + 1)
        throw ContractError(fmt::format("value vector of length {} needs {} thresholds, got {}",
                                        u.size(), u.size() - 1, tau.size()));
}

}  // namespace

Ordering lex_compare(const ValueVector& u, const ValueVector& v, const ThresholdVector& tau) {
    check_lengths(u, tau);
    check_lengths(v, tau);
    const std::size_t k = tau.size();
    for (std::size_t i = 0; i < k; ++i) {
        const double cu = std::min(u[i], tau[i]);
        const double cv = std::min(v[i], tau[i]);
        if (cu > cv) return Ordering::Greater;
        if (cu < cv) return Ordering::Less;
    }
    if (u[k] > v[k]) return Ordering::Greater;
    if (u[k] < v[k]) return Ordering::Less;
    return Ordering::Equal;
}

std::size_t satisfied_prefix(const ValueVector& u, const ThresholdVector& tau) {
    check_lengths(u, tau);
    for (std::size_t j = 0; j < tau.size(); ++j)
        if (u[j] < tau[j]) return j;
    return tau.size();
}

std::vector<StateId> TabularMomdp::terminal_states() const {
    std::vector<StateId> out;
    for (StateId s = 0; s < num_states_; ++s)
        if (terminal_[s]) out.push_back(s);
    return out;
}

std::size_t TabularMomdp::sample(StateId s, ActionId a, Rng& rng) const {
    const auto& outs = outcomes(s, a);
    if (outs.size() == 1) return 0;
    double r = uniform01(rng);
    for (std::size_t i = 0; i + 1 < outs.size(); ++i) {
        r -= outs[i].probability;
        if (r < 0.0) return i;
    }
    return outs.size() - 1;
}

bool TabularMomdp::is_deterministic() const {
    for (const auto& outs : outcomes_)
        if (outs.size() != 1) return false;
    return true;
}

MomdpBuilder::MomdpBuilder(std::size_t states, std::size_t actions, std::size_t objectives) {
    if (states == 0 || actions == 0 || objectives == 0)
        throw ContractError("MOMDP needs at least one state, action and objective");
    m_.num_states_ = states;
    m_.num_actions_ = actions;
    m_.num_objectives_ = objectives;
    m_.terminal_.assign(states, false);
    m_.outcomes_.resize(states * actions);
}

MomdpBuilder& MomdpBuilder::gamma(double g) {
    if (!(g > 0.0 && g <= 1.0)) throw ContractError("gamma must lie in (0, 1]");
    m_.gamma_ = g;
    return *this;
}

MomdpBuilder& MomdpBuilder::initial(StateId s) {
    if (s >= m_.num_states_) throw ContractError("initial state out of range");
    m_.initial_ = s;
    return *this;
}

MomdpBuilder& MomdpBuilder::terminal(StateId s) {
    if (s >= m_.num_states_) throw ContractError("terminal state out of range");
    m_.terminal_[s] = true;
    return *this;
}

MomdpBuilder& MomdpBuilder::transition(StateId s, ActionId a, StateId next, double p,
                                       ValueVector reward) {
    if (s >= m_.num_states_ || next >= m_.num_states_ || a >= m_.num_actions_)
        throw ContractError(fmt::format("transition ({}, {}, {}) out of range", s, a, next));
    if (static_cast<std::size_t>(reward.size()) != m_.num_objectives_)
        throw ContractError("reward vector length differs from objective count");
    if (!reward.allFinite()) throw ContractError("reward must be finite");
    if (!(p >= 0.0 && p <= 1.0)) throw ContractError("probability outside [0, 1]");
    m_.outcomes_[s * m_.num_actions_ + a].push_back({next, p, std::move(reward)});
    return *this;
}

TabularMomdp MomdpBuilder::build() const {
    TabularMomdp m = m_;
    const ValueVector zero = ValueVector::Zero(static_cast<Eigen::Index>(m.num_objectives_));
    for (StateId s = 0; s < m.num_states_; ++s) {
        for (ActionId a = 0; a < m.num_actions_; ++a) {
            auto& outs = m.outcomes_[s * m.num_actions_ + a];
            if (m.terminal_[s]) {
                outs = {Outcome{s, 1.0, zero}};
                continue;
            }
            double total = 0.0;
            for (const auto& o : outs) total += o.probability;
            if (outs.empty() || std::abs(total - 1.0) > 1e-9)
                throw ContractError(fmt::format(
                    "transition row ({}, {}) sums to {} instead of 1", s, a, total));
        }
    }
    return m;
}

ValueVector episode_return(const Trajectory& traj, double gamma, std::size_t objectives) {
    ValueVector total = ValueVector::Zero(static_cast<Eigen::Index>(objectives));
    double discount = 1.0;
    for (const auto& r : traj.rewards) {
        total += discount * r;
        discount *= gamma;
    }
    return total;
}

ValueVector episode_return(const Trajectory& traj, double gamma) {
    if (traj.rewards.empty()) throw ContractError("objective count unknown for an empty trajectory");
    return episode_return(traj, gamma, static_cast<std::size_t>(traj.rewards.front().size()));
}

ValueIterationResult optimal_q(const TabularMomdp& env, std::size_t objective, double tol,
                               std::size_t max_sweeps) {
    if (objective >= env.num_objectives()) throw ContractError("objective index out of range");
    const auto ns = static_cast<Eigen::Index>(env.num_states());
    const auto na = static_cast<Eigen::Index>(env.num_actions());
    ValueIterationResult res;
    res.q = Eigen::MatrixXd::Zero(ns, na);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(ns);
    const double g = env.gamma();
    for (res.sweeps = 0; res.sweeps < max_sweeps; ++res.sweeps) {
        double change = 0.0;
        for (Eigen::Index s = 0; s < ns; ++s) {
            for (Eigen::Index a = 0; a < na; ++a) {
                double q = 0.0;
                for (const auto& o : env.outcomes(s, a))
                    if (!env.is_terminal(s))
                        q += o.probability * (o.reward[objective] + g * v[o.next]);
                change = std::max(change, std::abs(q - res.q(s, a)));
                res.q(s, a) = q;
            }
        }
        for (Eigen::Index s = 0; s < ns; ++s)
            v[s] = env.is_terminal(s) ? 0.0 : res.q.row(s).maxCoeff();
        if (change < tol) {
            res.converged = true;
            ++res.sweeps;
            break;
        }
    }
    return res;
}

void write_momdp(std::ostream& os, const TabularMomdp& m) {
    os << "momdp 1\n";
    os << "states " << m.num_states() << "\n";
    os << "actions " << m.num_actions() << "\n";
    os << "objectives " << m.num_objectives() << "\n";
    os << "gamma " << fmt::format("{:.17g}", m.gamma()) << "\n";
    os << "initial " << m.initial_state() << "\n";
    for (StateId s : m.terminal_states()) os << "terminal " << s << "\n";
    for (StateId s = 0; s < m.num_states(); ++s) {
        if (m.is_terminal(s)) continue;
        for (ActionId a = 0; a < m.num_actions(); ++a) {
            for (const auto& o : m.outcomes(s, a)) {
                os << "t " << s << ' ' << a << ' ' << o.next << ' '
                   << fmt::format("{:.17g}", o.probability);
                for (Eigen::Index k = 0; k < o.reward.size(); ++k)
                    os << ' ' << fmt::format("{:.17g}", o.reward[k]);
                os << '\n';
            }
        }
    }
}

TabularMomdp read_momdp(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t states = 0, actions = 0, objectives = 0;
    double gamma = 1.0;
    StateId initial = 0;
    std::vector<StateId> terminals;
    struct Row {
        std::size_t line;
        StateId s;
        ActionId a;
        StateId next;
        double p;
        std::vector<double> r;
    };
    std::vector<Row> rows;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto fail = [&](const std::string& msg) -> void { throw ParseError(lineno, msg); };
        if (!header) {
            int version = 0;
            if (key != "momdp" || !(ls >> version) || version != 1) fail("expected 'momdp 1' header");
            header = true;
            continue;
        }
        bool ok = true;
        if (key == "states") ok = static_cast<bool>(ls >> states);
        else if (key == "actions") ok = static_cast<bool>(ls >> actions);
        else if (key == "objectives") ok = static_cast<bool>(ls >> objectives);
        else if (key == "gamma") ok = static_cast<bool>(ls >> gamma);
        else if (key == "initial") ok = static_cast<bool>(ls >> initial);
        else if (key == "terminal") {
            StateId s;
            ok = static_cast<bool>(ls >> s);
            terminals.push_back(s);
        } else if (key == "t") {
            Row r{lineno, 0, 0, 0, 0.0, {}};
            ok = static_cast<bool>(ls >> r.s >> r.a >> r.next >> r.p);
            double x;
            while (ls >> x) r.r.push_back(x);
            rows.push_back(std::move(r));
        } else {
            fail("unknown key '" + key + "'");
        }
        if (!ok) fail("malformed '" + key + "' line");
    }
    if (!header) throw ParseError(lineno, "empty MOMDP description");
    try {
        MomdpBuilder b(states, actions, objectives);
        b.gamma(gamma).initial(initial);
        for (StateId s : terminals) b.terminal(s);
        for (const auto& r : rows) {
            try {
                b.transition(r.s, r.a, r.next, r.p,
                             Eigen::Map<const ValueVector>(r.r.data(),
                                                           static_cast<Eigen::Index>(r.r.size())));
            } catch (const ContractError& e) {
                throw ParseError(r.line, e.what());
            }
        }
        return b.build();
    } catch (const ContractError& e) {
        throw ParseError(lineno, e.what());
    }
}

}  // namespace tlo
