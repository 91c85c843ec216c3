#include "tlo/lpa.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "tlo/errors.hpp"

namespace tlo {

namespace {

constexpr double kDegenerateNorm = 1e-12;

bool exempt(const ValueVector& f, const DirectionConfig& cfg, std::size_t j) {
    return cfg.active_constraints && j < cfg.thresholds.size() &&
           f[static_cast<Eigen::Index>(j)] > cfg.thresholds[j] + cfg.buffer;
}

}  // namespace

DirectionResult find_direction_detailed(const GradientTuple& grads, const ValueVector& values,
                                        const DirectionConfig& cfg) {
    const std::size_t k = grads.size();
    if (k == 0) throw ContractError("find_direction: empty gradient tuple");
    if (static_cast<std::size_t>(values.size()) != k)
        throw ContractError("find_direction: value and gradient counts differ");
    if (cfg.thresholds.size() + 1 != k)
        throw ContractError("find_direction: need K-1 thresholds");
    for (const auto& g : grads)
        if (g.size() != grads.front().size())
            throw ContractError("find_direction: gradient dimensions differ");
    if (!(cfg.delta >= 0.0 && cfg.delta < std::numbers::pi / 2))
        throw ContractError("find_direction: delta outside [0, pi/2)");

    DirectionResult res;
    const std::size_t o = satisfied_prefix(values, cfg.thresholds);
    res.active = o;
    const double boundary = std::numbers::pi / 2 - cfg.delta;

    Vec u = grads[o];
    if (u.norm() < kDegenerateNorm) return res;
    for (std::size_t j = 0; j < o; ++j) {
        if (exempt(values, cfg, j)) continue;
        if (!(grads[j].norm() > 0.0)) continue;
        if (angle_between(u, grads[j]) < boundary) continue;
        u = project_cone(u, Hypercone(grads[j], cfg.delta));
        res.projected.push_back(j);
        if (u.norm() < kDegenerateNorm) return res;
    }
    for (std::size_t j = 0; j <= o; ++j) {
        if (j + 1 != k && exempt(values, cfg, j)) continue;
        if (!(grads[j].norm() > 0.0)) continue;
        if (angle_between(u, grads[j]) > boundary + kAngleTolerance) return res;
    }
    res.direction = std::move(u);
    return res;
}

std::optional<Vec> find_direction(const GradientTuple& grads, const ValueVector& values,
                                  const DirectionConfig& cfg) {
    return find_direction_detailed(grads, values, cfg).direction;
}

ValueVector ObjectiveProblem::evaluate(const Vec& x) const {
    ValueVector f(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) f[static_cast<Eigen::Index>(i)] = values[i](x);
    return f;
}

GradientTuple ObjectiveProblem::gradient(const Vec& x) const {
    GradientTuple g;
    g.reserve(gradients.size());
    for (const auto& fn : gradients) g.push_back(fn(x));
    return g;
}

std::string to_string(Termination t) {
    return t == Termination::MaxIterations ? "max_iters" : "pareto_stationary";
}

LpaTrace lpa_run(const ObjectiveProblem& problem, const Vec& x0, const LpaConfig& cfg) {
    if (static_cast<std::size_t>(x0.size()) != problem.dimension)
        throw ContractError("lpa_run: initial point has wrong dimension");
    if (!(cfg.step_size > 0.0)) throw ContractError("lpa_run: step size must be positive");
    LpaTrace trace;
    Vec x = x0;
    for (std::size_t it = 0;; ++it) {
        const ValueVector f = problem.evaluate(x);
        const GradientTuple g = problem.gradient(x);
        bool finite = f.allFinite();
        for (const auto& gi : g) finite = finite && gi.allFinite();
        if (!finite)
            throw RuntimeAbort(fmt::format("lpa_run: non-finite objective or gradient at iteration {}", it));
        if (it == cfg.max_iters) {
            trace.steps.push_back({it, x, f, 0.0});
            trace.reason = Termination::MaxIterations;
            break;
        }
        const auto d = find_direction(g, f, cfg.direction);
        if (!d) {
            trace.steps.push_back({it, x, f, 0.0});
            trace.reason = Termination::ParetoStationary;
            break;
        }
        trace.steps.push_back({it, x, f, d->norm()});
        x += cfg.step_size * *d;
    }
    return trace;
}

void write_lpa_csv(std::ostream& os, const LpaTrace& trace) {
    if (trace.steps.empty()) return;
    const auto n = trace.steps.front().x.size();
    const auto k = trace.steps.front().values.size();
    os << "# lpa-trace v1\n";
    os << "iter";
    for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
    for (Eigen::Index i = 0; i < k; ++i) os << ",F" << i + 1;
    os << ",dir_norm,reason\n";
    for (std::size_t r = 0; r < trace.steps.size(); ++r) {
        const auto& s = trace.steps[r];
        os << s.iteration;
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt::format("{:.17g}", s.x[i]);
        for (Eigen::Index i = 0; i < k; ++i) os << ',' << fmt::format("{:.17g}", s.values[i]);
        os << ',' << fmt::format("{:.17g}", s.direction_norm) << ','
           << (r + 1 == trace.steps.size() ? to_string(trace.reason) : "step") << '\n';
    }
}

ObjectiveProblem benchmark_problem() {
    ObjectiveProblem p;
    p.dimension = 2;
    p.values = {
        [](const Vec& v) { return -4.0 * v[0] * v[0] - v[1] * v[1] - v[0] * v[1]; },
        [](const Vec& v) { return -(v[0] - 1.0) * (v[0] - 1.0) - (v[1] - 0.5) * (v[1] - 0.5); },
    };
    p.gradients = {
        [](const Vec& v) { return Vec{{-8.0 * v[0] - v[1], -2.0 * v[1] - v[0]}}; },
        [](const Vec& v) { return Vec{{-2.0 * (v[0] - 1.0), -2.0 * (v[1] - 0.5)}}; },
    };
    // Largest Hessian eigenvalue magnitudes.
    p.smoothness = {5.0 + std::sqrt(10.0), 2.0};
    return p;
}

BenchmarkSetup benchmark_setup(bool active_constraints) {
    BenchmarkSetup s;
    s.config.direction.thresholds = ThresholdVector({-0.5});
    s.config.direction.delta = std::numbers::pi / 90;
    s.config.direction.active_constraints = active_constraints;
    s.config.direction.buffer = 0.01;
    s.config.step_size = 0.2;
    s.config.max_iters = 500;
    s.x0 = active_constraints ? Vec{{-0.7, 0.95}} : Vec{{-0.25, -1.0}};
    return s;
}

}  // namespace tlo
