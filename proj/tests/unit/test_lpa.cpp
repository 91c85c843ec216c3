#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "tlo/errors.hpp"
#include "tlo/lpa.hpp"

using namespace tlo;
using std::numbers::pi;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
ValueVector vals(double a, double b) { return v2(a, b); }

DirectionConfig two_objectives(double delta, bool ac = false, double buffer = 0.0) {
    return {ThresholdVector({5}), delta, ac, buffer};
}

}  // namespace

TEST_CASE("find_direction examples") {
    const Vec single = *find_direction({v2(3, 4)}, (ValueVector(1) << 0).finished(), {});
    CHECK(single == v2(3, 4));

    CHECK(*find_direction({v2(1, 0), v2(0, 1)}, vals(4, 0), two_objectives(pi / 4)) == v2(1, 0));

    const Vec d = *find_direction({v2(1, 0), v2(0, 1)}, vals(6, 0), two_objectives(pi / 4));
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(0.5));

    CHECK_FALSE(find_direction({v2(1, 0), v2(-1, 0)}, vals(6, 0), two_objectives(0.2)).has_value());
}

TEST_CASE("active constraints exempt comfortably satisfied objectives") {
    const auto r = find_direction({v2(1, 0), v2(-1, 0)}, vals(6, 0), two_objectives(0.2, true, 0.5));
    REQUIRE(r.has_value());
    CHECK(*r == v2(-1, 0));
    CHECK_FALSE(find_direction({v2(1, 0), v2(-1, 0)}, vals(5.2, 0), two_objectives(0.2, true, 0.5)).has_value());
}

TEST_CASE("no-op projection and positive homogeneity") {
    const DirectionConfig cfg = two_objectives(0.1);
    const Vec g = v2(1, 0.2);
    CHECK(*find_direction({v2(1, 0), g}, vals(6, 0), cfg) == g);

    const GradientTuple m{v2(1, 0.3), v2(-0.4, 1)};
    const Vec d = *find_direction(m, vals(6, 0), cfg);
    const Vec scaled = *find_direction({3.5 * m[0], 3.5 * m[1]}, vals(6, 0), cfg);
    CHECK((scaled - 3.5 * d).norm() <= 1e-12);
    CHECK(angle_between(d, m[0]) <= pi / 2 - 0.1 + kAngleTolerance);
}

TEST_CASE("find_direction contract errors") {
    CHECK_THROWS_AS(find_direction({}, ValueVector(0), {}), ContractError);
    CHECK_THROWS_AS(find_direction({v2(1, 0), v2(0, 1)}, vals(1, 1), {}), ContractError);
}

TEST_CASE("benchmark problem values") {
    const ObjectiveProblem p = benchmark_problem();
    const ValueVector f = p.evaluate(v2(0, 0));
    CHECK(f[0] == 0.0);
    CHECK(f[1] == doctest::Approx(-1.25));
    CHECK(p.gradient(v2(0, 0))[0].isZero());
    CHECK(p.gradient(v2(1, 0.5))[1].isZero());
    // finite-difference check of both gradients at an arbitrary point
    const Vec x = v2(0.3, -0.7);
    for (std::size_t k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i) {
            Vec up = x, down = x;
            up[i] += 1e-6;
            down[i] -= 1e-6;
            const double fd = (p.values[k](up) - p.values[k](down)) / 2e-6;
            CHECK(p.gradient(x)[k][i] == doctest::Approx(fd).epsilon(1e-6));
        }
}

TEST_CASE("single objective run is gradient ascent") {
    ObjectiveProblem p;
    p.dimension = 2;
    p.values.push_back([](const Vec& x) { return -(x - v2(1, -2)).squaredNorm(); });
    p.gradients.push_back([](const Vec& x) { return Vec(-2 * (x - v2(1, -2))); });
    LpaConfig cfg;
    cfg.step_size = 0.1;
    const LpaTrace t = lpa_run(p, v2(0, 0), cfg);
    CHECK(p.gradient(t.final_step().x)[0].norm() < 1e-4);
}

TEST_CASE("benchmark runs stay near the reported values") {
    const ObjectiveProblem p = benchmark_problem();
    const BenchmarkSetup off = benchmark_setup(false);
    const LpaTrace t = lpa_run(p, off.x0, off.config);
    CHECK(t.final_step().values[0] == doctest::Approx(-0.450).epsilon(0.05));
    CHECK(t.final_step().values[1] == doctest::Approx(-0.580).epsilon(0.05));

    std::ostringstream a, b;
    write_lpa_csv(a, t);
    write_lpa_csv(b, lpa_run(p, off.x0, off.config));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# lpa-trace v1", 0) == 0);
}

TEST_CASE("non-finite objective aborts") {
    ObjectiveProblem p;
    p.dimension = 1;
    p.values.push_back([](const Vec& x) { return std::log(x[0]); });
    p.gradients.push_back([](const Vec& x) { return Vec::Constant(1, -1.0 / x[0]); });
    CHECK_THROWS_AS(lpa_run(p, Vec::Constant(1, 0.5), {}), RuntimeAbort);
}
