#include "tlo/cone.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tlo {

Hypercone::Hypercone(Vec axis, double delta) : axis_(std::move(axis)), delta_(delta) {
    if (axis_.size() == 0 || !(axis_.norm() > 0.0))
        throw std::invalid_argument("hypercone axis must be nonzero");
    if (!(delta_ >= 0.0 && delta_ < std::numbers::pi / 2))
        throw std::invalid_argument("hypercone delta must lie in [0, pi/2)");
    if (!axis_.allFinite())
        throw std::invalid_argument("hypercone axis must be finite");
}

double Hypercone::half_angle() const { return std::numbers::pi / 2 - delta_; }

double angle_between(const Vec& u, const Vec& v) {
    if (u.size() != v.size())
        throw std::invalid_argument("angle_between: dimension mismatch");
    const double nu = u.norm();
    const double nv = v.norm();
    if (!(nu > 0.0) || !(nv > 0.0))
        throw std::domain_error("angle_between: zero-norm vector");
    const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
    return std::acos(c);
}

bool cone_contains(const Vec& x, const Hypercone& cone) {
    if (!(x.norm() > 0.0)) return true;
    return angle_between(x, cone.axis()) <= cone.half_angle() + kAngleTolerance;
}

Vec project_cone(const Vec& g, const Hypercone& cone) {
    const Vec& a = cone.axis();
    if (g.size() != a.size())
        throw std::invalid_argument("project_cone: dimension mismatch");
    const double gn = g.norm();
    if (!(gn > 0.0)) return Vec::Zero(g.size());
    if (cone_contains(g, cone)) return g;

    const double delta = cone.delta();
    const double phi = angle_between(g, a);
    if (phi >= std::numbers::pi - delta) return Vec::Zero(g.size());

    Vec p = g + a * (gn / a.norm()) * (std::sin(phi) * std::tan(delta) - std::cos(phi));
    const double pn = p.norm();
    if (!(pn > 0.0)) return Vec::Zero(g.size());
    return p * (gn / pn * std::sin(delta + phi));
}

}  // namespace tlo
