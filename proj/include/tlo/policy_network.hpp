#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tlo/cone.hpp"
#include "tlo/lmdp.hpp"

namespace tlo {

enum class NetMode { Train, Eval };

// Per hidden unit scale: 0 for dropped units, 1/(1-p) for kept ones. Empty
// means no dropout.
struct DropoutMask {
    Eigen::VectorXd scale;
    bool empty() const { return scale.size() == 0; }
};

struct Forward {
    Eigen::VectorXd probs;
    DropoutMask mask;
};

// one-hot(state) -> hidden ReLU -> dropout -> logits -> softmax(logits / T).
// Parameters live in one flat vector: W1 (hidden x states, column-major), b1,
// W2 (actions x hidden, column-major), b2.
class PolicyNetwork {
public:
    PolicyNetwork(std::size_t states, std::size_t actions, std::size_t hidden = 128, double dropout = 0.6,
                  double temperature = 10.0);

    std::size_t num_states() const { return states_; }
    std::size_t num_actions() const { return actions_; }
    std::size_t hidden() const { return hidden_; }
    double dropout() const { return dropout_; }
    double temperature() const { return temperature_; }
    std::size_t parameter_count() const { return static_cast<std::size_t>(theta_.size()); }

    Vec& parameters() { return theta_; }
    const Vec& parameters() const { return theta_; }

    // Uniform in +-1/sqrt(fan_in) for every weight and bias.
    void initialize(Rng& rng);

    DropoutMask sample_mask(Rng& rng) const;
    Eigen::VectorXd logits(StateId s, const DropoutMask& mask) const;
    Eigen::VectorXd probabilities(StateId s, const DropoutMask& mask = {}) const;
    Forward forward(StateId s, NetMode mode, Rng& rng) const;
    ActionId sample_action(const Eigen::VectorXd& probs, Rng& rng) const;

    Vec grad_logprob(StateId s, ActionId a, const DropoutMask& mask) const;
    // outs[k] += weights[k] * grad_logprob(s, a, mask), touching only the
    // nonzero blocks.
    void accumulate_grad_logprob(StateId s, ActionId a, const DropoutMask& mask,
                                 std::span<const double> weights, std::vector<Vec>& outs) const;

    void save(std::ostream& os) const;
    static PolicyNetwork load(std::istream& is);

private:
    std::size_t w1_offset() const { return 0; }
    std::size_t b1_offset() const { return hidden_ * states_; }
    std::size_t w2_offset() const { return b1_offset() + hidden_; }
    std::size_t b2_offset() const { return w2_offset() + actions_ * hidden_; }
    Eigen::VectorXd hidden_activation(StateId s, const DropoutMask& mask, Eigen::VectorXd* pre) const;

    std::size_t states_;
    std::size_t actions_;
    std::size_t hidden_;
    double dropout_;
    double temperature_;
    Vec theta_;
};

}  // namespace tlo
