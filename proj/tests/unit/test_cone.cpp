#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <doctest.h>

#include "tlo/cone.hpp"
#include "tlo/random.hpp"

using namespace tlo;
using std::numbers::pi;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Vec random_vec(Rng& rng, std::size_t n) {
    Vec v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = uniform(rng, -1, 1);
    return v;
}

}  // namespace

TEST_CASE("angle_between") {
    CHECK(angle_between(v2(1, 0), v2(0, 1)) == doctest::Approx(pi / 2));
    CHECK(angle_between(v2(1, 0), v2(2, 0)) == doctest::Approx(0.0));
    CHECK(angle_between(v2(1, 0), v2(-1, 1)) == doctest::Approx(3 * pi / 4));
    CHECK_THROWS_AS(angle_between(v2(0, 0), v2(1, 0)), std::domain_error);
}

TEST_CASE("cone_contains") {
    const Hypercone c(v2(1, 0), pi / 4);
    CHECK(cone_contains(v2(0, 0), c));
    CHECK(cone_contains(v2(1, 0.1), c));
    CHECK_FALSE(cone_contains(v2(0, 1), c));
    CHECK_THROWS(Hypercone(v2(0, 0), 0.1));
    CHECK_THROWS(Hypercone(v2(1, 0), pi / 2));
}

TEST_CASE("project_cone examples") {
    const Vec p = project_cone(v2(0, 1), Hypercone(v2(1, 0), pi / 4));
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));

    const Vec inside = project_cone(v2(1, 0.1), Hypercone(v2(1, 0), pi / 4));
    CHECK(inside == v2(1, 0.1));

    const Vec half = project_cone(v2(1, -1), Hypercone(v2(0, 1), 0.0));
    CHECK(half[0] == doctest::Approx(1.0));
    CHECK(half[1] == doctest::Approx(0.0).epsilon(1e-12));

    CHECK(project_cone(v2(-1, 0), Hypercone(v2(1, 0), 0.3)).norm() == 0.0);
    CHECK(project_cone(v2(0, 0), Hypercone(v2(1, 0), 0.3)).norm() == 0.0);
}

TEST_CASE("project_cone properties on random instances") {
    Rng rng = make_rng(7);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 2 + uniform_index(rng, 8);
        const Vec g = random_vec(rng, n);
        const Vec a = random_vec(rng, n);
        const double delta = uniform(rng, 0.0, 1.5);
        const Hypercone c(a, delta);
        const Vec out = project_cone(g, c);
        CHECK((project_cone(out, c) - out).norm() <= 1e-9 * std::max(1.0, out.norm()));

        const double phi = angle_between(g, a);
        if (cone_contains(g, c) || phi >= pi - delta) continue;
        CHECK(std::abs(angle_between(out, a) - (pi / 2 - delta)) <= 1e-7);
        CHECK(std::abs(out.norm() - g.norm() * std::sin(delta + phi)) <= 1e-9 * g.norm());

        Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), 2);
        basis << g, a;
        const Vec coef = basis.colPivHouseholderQr().solve(out);
        CHECK((basis * coef - out).norm() <= 1e-9);
    }
}

TEST_CASE("zero delta is the halfspace projection") {
    Rng rng = make_rng(8);
    for (int i = 0; i < 100; ++i) {
        const Vec g = random_vec(rng, 5), a = random_vec(rng, 5);
        const Vec out = project_cone(g, Hypercone(a, 0.0));
        const Vec expect = g.dot(a) >= 0 ? g : Vec(g - g.dot(a) / a.squaredNorm() * a);
        CHECK((out - expect).norm() <= 1e-9);
    }
}
