#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlo/cone.hpp"
#include "tlo/lmdp.hpp"

namespace tlo {

using GradientTuple = std::vector<Vec>;

struct DirectionConfig {
    ThresholdVector thresholds;
    double delta = 0.0;
    bool active_constraints = false;
    double buffer = 0.0;
};

struct DirectionResult {
    std::optional<Vec> direction;
    std::size_t active = 0;               // objective being improved
    std::vector<std::size_t> projected;   // objectives whose cone was projected onto
};

DirectionResult find_direction_detailed(const GradientTuple& grads, const ValueVector& values,
                                        const DirectionConfig& cfg);

// Empty when no direction stays inside every relevant cone.
std::optional<Vec> find_direction(const GradientTuple& grads, const ValueVector& values,
                                  const DirectionConfig& cfg);

struct LpaConfig {
    DirectionConfig direction;
    double step_size = 0.2;
    std::size_t max_iters = 500;
};

struct ObjectiveProblem {
    std::size_t dimension = 0;
    std::vector<std::function<double(const Vec&)>> values;
    std::vector<std::function<Vec(const Vec&)>> gradients;
    std::vector<double> smoothness;

    std::size_t num_objectives() const { return values.size(); }
    ValueVector evaluate(const Vec& x) const;
    GradientTuple gradient(const Vec& x) const;
};

enum class Termination { MaxIterations, ParetoStationary };

std::string to_string(Termination t);

struct TraceStep {
    std::size_t iteration;
    Vec x;
    ValueVector values;
    double direction_norm;
};

struct LpaTrace {
    std::vector<TraceStep> steps;
    Termination reason = Termination::MaxIterations;

    const TraceStep& final_step() const { return steps.back(); }
};

// x <- x + step_size * d until max_iters or until no direction exists.
// Throws RuntimeAbort on non-finite values or gradients.
LpaTrace lpa_run(const ObjectiveProblem& problem, const Vec& x0, const LpaConfig& cfg);

void write_lpa_csv(std::ostream& os, const LpaTrace& trace);

// F1 = -(4x^2 + y^2 + xy), F2 = -(x-1)^2 - (y-0.5)^2.
ObjectiveProblem benchmark_problem();

struct BenchmarkSetup {
    LpaConfig config;
    Vec x0;
};

BenchmarkSetup benchmark_setup(bool active_constraints);

}  // namespace tlo
