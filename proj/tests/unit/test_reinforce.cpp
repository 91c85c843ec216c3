#include <cmath>
#include <sstream>

#include <doctest.h>

#include "tlo/adam.hpp"
#include "tlo/errors.hpp"
#include "tlo/maze.hpp"
#include "tlo/policy_network.hpp"
#include "tlo/reinforce.hpp"

using namespace tlo;

namespace {

// Straight corridor where every step costs 1; action 0 advances.
TabularMomdp corridor(std::size_t objectives) {
    MomdpBuilder b(4, 2, objectives);
    b.gamma(0.9).initial(0).terminal(3);
    for (StateId s = 0; s < 3; ++s) {
        b.transition(s, 0, s + 1, 1.0, ValueVector::Constant(static_cast<Eigen::Index>(objectives), -1.0));
        b.transition(s, 1, s, 1.0, ValueVector::Constant(static_cast<Eigen::Index>(objectives), -1.0));
    }
    return b.build();
}

PolicyNetwork random_net(std::size_t states, std::size_t actions, double dropout, std::uint64_t seed) {
    PolicyNetwork net(states, actions, 16, dropout);
    Rng rng(seed);
    net.initialize(rng);
    return net;
}

EpisodeRecord manual_episode(std::vector<StateId> states, std::vector<ActionId> actions,
                             std::vector<ValueVector> rewards) {
    EpisodeRecord ep;
    ep.trajectory.states = std::move(states);
    ep.trajectory.actions = std::move(actions);
    ep.trajectory.rewards = std::move(rewards);
    ep.masks.assign(ep.trajectory.actions.size(), DropoutMask{});
    return ep;
}

}  // namespace

TEST_CASE("zero network is uniform and its output-bias gradient is known") {
    PolicyNetwork net(5, 4);
    net.parameters().setZero();
    const Eigen::VectorXd p = net.probabilities(2);
    for (double x : p) CHECK(x == doctest::Approx(0.25));
    const Vec g = net.grad_logprob(2, 1, {});
    const auto b2 = static_cast<Eigen::Index>(net.parameter_count() - 4);
    CHECK(g[b2 + 1] == doctest::Approx(0.75 / 10.0));
    CHECK(g[b2 + 0] == doctest::Approx(-0.25 / 10.0));
}

TEST_CASE("temperature flattens the softmax") {
    PolicyNetwork hot(1, 3, 4, 0.0, 10.0), cold(1, 3, 4, 0.0, 1.0);
    hot.parameters().setZero();
    const auto b2 = static_cast<Eigen::Index>(hot.parameter_count() - 3);
    hot.parameters().segment(b2, 3) << 2.0, 0.0, -1.0;
    cold.parameters() = hot.parameters();
    const Eigen::VectorXd ph = hot.probabilities(0), pc = cold.probabilities(0);
    const double z = std::exp(0.2) + 1 + std::exp(-0.1);
    CHECK(ph[0] == doctest::Approx(std::exp(0.2) / z));
    CHECK(ph.maxCoeff() < pc.maxCoeff());
    CHECK(ph.minCoeff() > pc.minCoeff());
}

TEST_CASE("probabilities sum to one with and without dropout") {
    const PolicyNetwork net = random_net(6, 4, 0.6, 3);
    Rng rng(9);
    for (StateId s = 0; s < 6; ++s) {
        CHECK(net.forward(s, NetMode::Train, rng).probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(net.forward(s, NetMode::Eval, rng).probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(net.forward(s, NetMode::Eval, rng).mask.empty());
    }
}

TEST_CASE("gradient matches finite differences under a fixed dropout mask") {
    PolicyNetwork net = random_net(5, 3, 0.6, 4);
    Rng rng(2);
    const DropoutMask mask = net.sample_mask(rng);
    const Vec g = net.grad_logprob(1, 2, mask);
    double worst = 0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double keep = net.parameters()[i];
        net.parameters()[i] = keep + 1e-5;
        const double up = std::log(net.probabilities(1, mask)[2]);
        net.parameters()[i] = keep - 1e-5;
        const double down = std::log(net.probabilities(1, mask)[2]);
        net.parameters()[i] = keep;
        worst = std::max(worst, std::abs((up - down) / 2e-5 - g[i]));
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("score function identity") {
    const PolicyNetwork net = random_net(4, 4, 0.0, 5);
    for (StateId s = 0; s < 4; ++s) {
        const Eigen::VectorXd p = net.probabilities(s);
        Vec sum = Vec::Zero(static_cast<Eigen::Index>(net.parameter_count()));
        for (ActionId a = 0; a < 4; ++a) sum += p[static_cast<Eigen::Index>(a)] * net.grad_logprob(s, a, {});
        CHECK(sum.cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("network save and load") {
    const PolicyNetwork net = random_net(3, 2, 0.6, 6);
    std::stringstream ss;
    net.save(ss);
    const PolicyNetwork back = PolicyNetwork::load(ss);
    CHECK(back.parameters() == net.parameters());
    CHECK(back.dropout() == net.dropout());
    CHECK(back.temperature() == net.temperature());
}

TEST_CASE("adam first step has the learning-rate magnitude") {
    Adam opt(2, {0.1, 0.9, 0.999, 1e-8});
    Vec x = Vec::Constant(2, 1.0);
    opt.step(x, (Vec(2) << 3.0, -0.01).finished());
    CHECK(x[0] == doctest::Approx(0.9));
    CHECK(x[1] == doctest::Approx(1.1));
    for (int i = 0; i < 2000; ++i) opt.step(x, 2 * x);
    CHECK(x.norm() < 1e-2);
}

TEST_CASE("episode gradients follow the return recursion") {
    const PolicyNetwork net = random_net(3, 2, 0.0, 7);
    const Vec g0 = net.grad_logprob(0, 1, {}), g1 = net.grad_logprob(1, 0, {});

    const auto zero = episode_gradients(
        net, manual_episode({0, 1, 2}, {1, 0}, {ValueVector::Zero(2), ValueVector::Zero(2)}), 0.5, 2);
    CHECK(zero.m[0].isZero());
    CHECK(zero.m[1].isZero());
    CHECK(zero.f.isZero());

    const auto one = episode_gradients(net, manual_episode({0, 1}, {1}, {ValueVector::Ones(1)}), 0.5, 1);
    CHECK((one.m[0] - g0).norm() < 1e-12);

    const auto two = episode_gradients(
        net, manual_episode({0, 1, 2}, {1, 0}, {ValueVector::Zero(1), ValueVector::Ones(1)}), 0.5, 1);
    CHECK((two.m[0] - (0.5 * g0 + g1)).norm() < 1e-12);
    CHECK(two.f[0] == 1.0);
    CHECK(two.returns[0][0] == 0.5);
    CHECK(two.returns[1][0] == 1.0);
}

TEST_CASE("single objective lexicographic training equals vanilla REINFORCE") {
    const TabularMomdp env = corridor(1);
    ReinforceConfig cfg;
    cfg.episodes = 150;
    cfg.hidden = 16;
    cfg.eval_episodes = 10;
    const ReinforceResult lex = reinforce_train(env, cfg, 11);
    const ReinforceResult van = vanilla_reinforce_train(env, cfg, 11);
    CHECK(lex.skipped_updates == 0);
    CHECK(lex.policy.parameters() == van.policy.parameters());
    std::ostringstream a, b;
    write_rl_csv(a, lex.trace);
    write_rl_csv(b, van.trace);
    CHECK(a.str() == b.str());
}

TEST_CASE("training is deterministic per seed and respects the cone contract") {
    const TabularMomdp env = maze_to_momdp(builtin_maze("maze-small"));
    ReinforceConfig cfg;
    cfg.episodes = 60;
    cfg.hidden = 16;
    cfg.eval_episodes = 10;
    cfg.direction = {ThresholdVector({0.5}), 0.3, false, 0.0};
    cfg.check_cones = true;
    const ReinforceResult a = reinforce_train(env, cfg, 4);
    const ReinforceResult b = reinforce_train(env, cfg, 4);
    CHECK(a.policy.parameters() == b.policy.parameters());
    std::ostringstream ca, cb;
    write_rl_csv(ca, a.trace);
    write_rl_csv(cb, b.trace);
    CHECK(ca.str() == cb.str());
    CHECK(ca.str().rfind("# rl-trace v1\nepisode,sat_1,sat_2,joint,dir_norm,skipped\n", 0) == 0);
    const ReinforceResult c = reinforce_train(env, cfg, 5);
    CHECK(c.policy.parameters() != a.policy.parameters());
    CHECK_THROWS_AS(reinforce_train(env, ReinforceConfig{}, 0), ContractError);
}

TEST_CASE("action sequence probability on a deterministic env") {
    const TabularMomdp env = corridor(1);
    PolicyNetwork net(4, 2, 8);
    net.parameters().setZero();
    const std::vector<ActionId> path{0, 0, 0};
    CHECK(action_sequence_probability(env, net, path) == doctest::Approx(0.125));
}
