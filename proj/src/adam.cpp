#include "tlo/adam.hpp"

#include <cmath>

#include "tlo/errors.hpp"

namespace tlo {

Adam::Adam(std::size_t dimension, AdamConfig cfg)
    : cfg_(cfg), m_(Vec::Zero(static_cast<Eigen::Index>(dimension))), v_(Vec::Zero(static_cast<Eigen::Index>(dimension))) {
    if (!(cfg.learning_rate > 0.0)) throw ContractError("Adam learning rate must be positive");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
        throw ContractError("Adam betas must lie in [0, 1)");
}

void Adam::step(Vec& params, const Vec& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw ContractError("Adam: dimension mismatch");
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    params.array() -= cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
}

}  // namespace tlo
