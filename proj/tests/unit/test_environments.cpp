#include <algorithm>
#include <set>

#include <doctest.h>

#include "tlo/errors.hpp"
#include "tlo/ftn.hpp"
#include "tlo/maze.hpp"

using namespace tlo;

TEST_CASE("maze-small layout") {
    const MazeSpec m = builtin_maze("maze-small");
    CHECK(m.width == 3);
    CHECK(m.height == 3);
    CHECK(m.start == Cell{1, 0});
    CHECK(m.goal == Cell{1, 2});
    CHECK(m.tile({0, 1}) == Tile::HighPenalty);
    CHECK(m.tile({1, 1}) == Tile::HighPenalty);
    CHECK(m.tile({2, 1}) == Tile::Free);
}

TEST_CASE("maze-extended is four columns by five rows") {
    const MazeSpec m = builtin_maze("maze-extended");
    CHECK(m.width == 4);
    CHECK(m.height == 5);
    CHECK(m.start == Cell{0, 0});
    CHECK(m.goal == Cell{1, 4});
    CHECK(m.tile({1, 3}) == Tile::LowPenalty);
}

TEST_CASE("every built-in maze parses and validates") {
    const auto all = builtin_mazes();
    CHECK(all.size() == 4);
    for (const auto& [name, spec] : all) {
        CAPTURE(name);
        CHECK_NOTHROW(spec.validate());
        const MazeSpec again = parse_maze(format_maze(spec));
        CHECK(again.tiles == spec.tiles);
        CHECK(again.start == spec.start);
        CHECK(again.goal == spec.goal);
        CHECK_NOTHROW(maze_to_momdp(spec));
    }
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_AS(parse_maze("|__|S_|\n|__|__|\n"), ParseError);
    try {
        parse_maze("|__|G_|\n|S_|xx|\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_maze("|G_|S_|\n|S_|__|\n"), ParseError);
    CHECK_THROWS_AS(parse_maze("|G_|S_|\n|__|\n"), ParseError);
    CHECK_THROWS_AS(parse_maze(""), ParseError);
}

TEST_CASE("maze transitions") {
    const MazeSpec m = builtin_maze("maze-small");
    const TabularMomdp env = maze_to_momdp(m);
    auto step = [&](Cell c, MazeAction a) { return env.outcomes(m.state(c), static_cast<ActionId>(a)).front(); };

    const Outcome up = step({1, 0}, MazeAction::Up);
    CHECK(up.next == m.state({1, 1}));
    CHECK(up.reward[0] == 0.0);
    CHECK(up.reward[1] == -5.0);

    CHECK(step({0, 0}, MazeAction::Left).next == m.state({0, 0}));

    const Outcome goal = step({2, 2}, MazeAction::Left);
    CHECK(goal.next == m.state(m.goal));
    CHECK(env.is_terminal(goal.next));
    CHECK(goal.reward[0] == 1.0);
    CHECK(goal.reward[1] == 0.0);
}

TEST_CASE("endpoint primary objective is nonzero only on entering the goal") {
    const MazeSpec m = builtin_maze("maze-concave-simple");
    const TabularMomdp env = maze_to_momdp(m);
    for (StateId s = 0; s < env.num_states(); ++s)
        for (ActionId a = 0; a < env.num_actions(); ++a)
            for (const Outcome& o : env.outcomes(s, a))
                if (o.reward[0] != 0.0) CHECK((o.next == m.state(m.goal) && s != o.next));
}

TEST_CASE("path penalty scheme") {
    MazeSpec m = builtin_maze("maze-extended");
    m.scheme = ObjectiveScheme::PathPenaltyPrimary;
    const TabularMomdp env = maze_to_momdp(m);
    const Outcome into_hh = env.outcomes(m.state({0, 0}), static_cast<ActionId>(MazeAction::Up)).front();
    CHECK(into_hh.reward[0] == -5.0);
    CHECK(into_hh.reward[1] == -1.0);
    const Outcome goal = env.outcomes(m.state({0, 4}), static_cast<ActionId>(MazeAction::Right)).front();
    CHECK(goal.reward[0] == 1.0);
    CHECK(goal.reward[1] == 0.0);
}

TEST_CASE("ftn depth one") {
    const FtnSpec spec = make_ftn_spec(1, 3, 0);
    const TabularMomdp env = ftn_env(spec);
    CHECK(env.num_states() == 3);
    CHECK(env.num_actions() == 2);
    const Outcome left = env.outcomes(0, 0).front();
    CHECK(left.next == spec.leaf_state(0));
    CHECK(env.is_terminal(left.next));
    CHECK(left.reward == spec.leaf_rewards[0]);
}

TEST_CASE("ftn policies enumerate the leaf rewards") {
    const FtnSpec spec = make_ftn_spec(5, 11, 13);
    const TabularMomdp env = ftn_env(spec);
    CHECK(spec.leaf_rewards.size() == 32);
    for (const ValueVector& r : spec.leaf_rewards) {
        CHECK(r.size() == 6);
        CHECK(r.norm() == doctest::Approx(1.0));
        CHECK(r.minCoeff() >= 0.0);
    }
    std::set<std::size_t> seen;
    for (std::size_t leaf = 0; leaf < spec.num_leaves(); ++leaf) {
        StateId s = env.initial_state();
        ValueVector total = ValueVector::Zero(6);
        std::size_t steps = 0;
        for (ActionId a : spec.path_to(leaf)) {
            const Outcome& o = env.outcomes(s, a).front();
            total += o.reward;
            s = o.next;
            ++steps;
        }
        CHECK(steps == 5);
        CHECK(env.is_terminal(s));
        CHECK(total == spec.leaf_rewards[spec.leaf_of(s)]);
        seen.insert(spec.leaf_of(s));
    }
    CHECK(seen.size() == 32);
}

TEST_CASE("ftn thresholds single out the target leaf and are reproducible") {
    for (std::size_t target : {0u, 7u, 31u}) {
        const FtnSpec spec = make_ftn_spec(5, 42, target);
        CHECK(ftn_target_unique(spec));
        CHECK(spec.thresholds.size() == 5);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(spec.thresholds[i] == doctest::Approx(spec.leaf_rewards[target][static_cast<Eigen::Index>(i)] - 1e-3));
        const FtnSpec again = make_ftn_spec(5, 42, target);
        CHECK(again.leaf_rewards == spec.leaf_rewards);
    }
    CHECK_THROWS_AS(make_ftn_spec(5, 0, 32), ContractError);
}
