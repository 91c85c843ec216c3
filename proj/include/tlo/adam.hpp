#pragma once

#include <cstddef>

#include "tlo/cone.hpp"

namespace tlo {

struct AdamConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Minimises: params -= lr * m_hat / (sqrt(v_hat) + eps).
class Adam {
public:
    Adam(std::size_t dimension, AdamConfig cfg = {});

    void step(Vec& params, const Vec& grad);
    std::size_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    Vec m_;
    Vec v_;
    std::size_t t_ = 0;
};

}  // namespace tlo
