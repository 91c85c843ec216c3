#pragma once

#include <Eigen/Core>

namespace tlo {

using Vec = Eigen::VectorXd;

// Slack applied to every angle comparison against a cone boundary.
inline constexpr double kAngleTolerance = 1e-7;

// Vectors within pi/2 - delta of the axis. delta = 0 is the positive halfspace.
class Hypercone {
public:
    Hypercone(Vec axis, double delta);

    const Vec& axis() const { return axis_; }
    double delta() const { return delta_; }
    double half_angle() const;

private:
    Vec axis_;
    double delta_;
};

// Throws std::domain_error when either vector has zero norm.
double angle_between(const Vec& u, const Vec& v);

bool cone_contains(const Vec& x, const Hypercone& cone);

// Closest point of the cone to g. Returns g when it is already inside and
// the apex when g lies in the polar cone.
Vec project_cone(const Vec& g, const Hypercone& cone);

}  // namespace tlo
