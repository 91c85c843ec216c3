#include "tlo/policy_network.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "tlo/errors.hpp"

namespace tlo {

PolicyNetwork::PolicyNetwork(std::size_t states, std::size_t actions, std::size_t hidden, double dropout,
                             double temperature)
    : states_(states), actions_(actions), hidden_(hidden), dropout_(dropout), temperature_(temperature) {
    if (states == 0 || actions == 0 || hidden == 0) throw ContractError("policy network dimensions must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ContractError("dropout must lie in [0, 1)");
    if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
    theta_ = Vec::Zero(static_cast<Eigen::Index>(b2_offset() + actions_));
}

void PolicyNetwork::initialize(Rng& rng) {
    const double k1 = 1.0 / std::sqrt(static_cast<double>(states_));
    const double k2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (std::size_t i = 0; i < w2_offset(); ++i) theta_[static_cast<Eigen::Index>(i)] = uniform(rng, -k1, k1);
    for (std::size_t i = w2_offset(); i < parameter_count(); ++i)
        theta_[static_cast<Eigen::Index>(i)] = uniform(rng, -k2, k2);
}

DropoutMask PolicyNetwork::sample_mask(Rng& rng) const {
    DropoutMask m;
    if (dropout_ == 0.0) return m;
    m.scale.resize(static_cast<Eigen::Index>(hidden_));
    const double keep = 1.0 / (1.0 - dropout_);
    for (Eigen::Index i = 0; i < m.scale.size(); ++i) m.scale[i] = bernoulli(rng, dropout_) ? 0.0 : keep;
    return m;
}

Eigen::VectorXd PolicyNetwork::hidden_activation(StateId s, const DropoutMask& mask, Eigen::VectorXd* pre) const {
    if (s >= states_) throw ContractError("policy network: state out of range");
    const auto h = static_cast<Eigen::Index>(hidden_);
    Eigen::VectorXd z = theta_.segment(static_cast<Eigen::Index>(w1_offset() + s * hidden_), h) +
                        theta_.segment(static_cast<Eigen::Index>(b1_offset()), h);
    if (pre) *pre = z;
    Eigen::VectorXd act = z.cwiseMax(0.0);
    if (!mask.empty()) act = act.cwiseProduct(mask.scale);
    return act;
}

Eigen::VectorXd PolicyNetwork::logits(StateId s, const DropoutMask& mask) const {
    const Eigen::VectorXd act = hidden_activation(s, mask, nullptr);
    const auto a = static_cast<Eigen::Index>(actions_);
    const auto h = static_cast<Eigen::Index>(hidden_);
    Eigen::Map<const Eigen::MatrixXd> w2(theta_.data() + w2_offset(), a, h);
    return w2 * act + theta_.segment(static_cast<Eigen::Index>(b2_offset()), a);
}

Eigen::VectorXd PolicyNetwork::probabilities(StateId s, const DropoutMask& mask) const {
    Eigen::VectorXd z = logits(s, mask) / temperature_;
    z.array() -= z.maxCoeff();
    Eigen::VectorXd p = z.array().exp();
    return p / p.sum();
}

Forward PolicyNetwork::forward(StateId s, NetMode mode, Rng& rng) const {
    Forward f;
    if (mode == NetMode::Train) f.mask = sample_mask(rng);
    f.probs = probabilities(s, f.mask);
    return f;
}

ActionId PolicyNetwork::sample_action(const Eigen::VectorXd& probs, Rng& rng) const {
    double r = uniform01(rng);
    for (Eigen::Index a = 0; a + 1 < probs.size(); ++a) {
        r -= probs[a];
        if (r < 0.0) return static_cast<ActionId>(a);
    }
    return static_cast<ActionId>(probs.size() - 1);
}

void PolicyNetwork::accumulate_grad_logprob(StateId s, ActionId a, const DropoutMask& mask,
                                            std::span<const double> weights, std::vector<Vec>& outs) const {
    if (a >= actions_) throw ContractError("policy network: action out of range");
    if (weights.size() != outs.size()) throw ContractError("accumulate_grad_logprob: weight count mismatch");
    Eigen::VectorXd pre;
    const Eigen::VectorXd act = hidden_activation(s, mask, &pre);
    const auto na = static_cast<Eigen::Index>(actions_);
    const auto h = static_cast<Eigen::Index>(hidden_);
    Eigen::VectorXd z = (logits(s, mask) / temperature_);
    z.array() -= z.maxCoeff();
    Eigen::VectorXd p = z.array().exp();
    p /= p.sum();

    Eigen::VectorXd gz = -p;
    gz[static_cast<Eigen::Index>(a)] += 1.0;
    gz /= temperature_;
    Eigen::Map<const Eigen::MatrixXd> w2(theta_.data() + w2_offset(), na, h);
    Eigen::VectorXd gpre = w2.transpose() * gz;
    if (!mask.empty()) gpre = gpre.cwiseProduct(mask.scale);
    for (Eigen::Index i = 0; i < h; ++i)
        if (!(pre[i] > 0.0)) gpre[i] = 0.0;

    for (std::size_t k = 0; k < outs.size(); ++k) {
        const double w = weights[k];
        if (w == 0.0) continue;
        Vec& out = outs[k];
        out.segment(static_cast<Eigen::Index>(w1_offset() + s * hidden_), h) += w * gpre;
        out.segment(static_cast<Eigen::Index>(b1_offset()), h) += w * gpre;
        Eigen::Map<Eigen::MatrixXd> gw2(out.data() + w2_offset(), na, h);
        gw2.noalias() += w * gz * act.transpose();
        out.segment(static_cast<Eigen::Index>(b2_offset()), na) += w * gz;
    }
}

Vec PolicyNetwork::grad_logprob(StateId s, ActionId a, const DropoutMask& mask) const {
    std::vector<Vec> out{Vec::Zero(theta_.size())};
    const double one = 1.0;
    accumulate_grad_logprob(s, a, mask, std::span<const double>(&one, 1), out);
    return out.front();
}

void PolicyNetwork::save(std::ostream& os) const {
    os << "policy-network 1\n";
    os << states_ << ' ' << actions_ << ' ' << hidden_ << ' ' << fmt::format("{:.17g} {:.17g}", dropout_, temperature_)
       << '\n';
    for (Eigen::Index i = 0; i < theta_.size(); ++i) os << fmt::format("{:.17g}\n", theta_[i]);
}

PolicyNetwork PolicyNetwork::load(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "policy-network" || version != 1)
        throw ParseError(1, "expected 'policy-network 1' header");
    std::size_t s, a, h;
    double p, t;
    if (!(is >> s >> a >> h >> p >> t)) throw ParseError(2, "malformed network dimensions");
    PolicyNetwork net(s, a, h, p, t);
    for (Eigen::Index i = 0; i < net.theta_.size(); ++i)
        if (!(is >> net.theta_[i])) throw ParseError(static_cast<std::size_t>(i) + 3, "missing network parameter");
    return net;
}

}  // namespace tlo
