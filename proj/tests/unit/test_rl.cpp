#include <doctest.h>

#include "random_mdp.hpp"
#include "roverplan/errors.hpp"
#include "roverplan/mdp/value_iteration.hpp"
#include "roverplan/rl/td_learning.hpp"
#include "roverplan/rng.hpp"

#include <algorithm>
#include <cstring>

using namespace roverplan;
using namespace roverplan::mdp;
using rl::LearnConfig;

namespace {

TabularMdp self_loop() {
    TabularMdpBuilder b(1, 1, 0.95);
    b.add(0, 0, 0, 1.0, 1.0);
    return b.build();
}

/// s0 --a0 (r=1)--> s1 --a0 (r=2)--> terminal; a1 from either state ends the
/// episode with reward 0.5.
TabularMdp two_state_chain() {
    TabularMdpBuilder b(3, 2, 0.9);
    b.add(0, 0, 1, 1.0, 1.0);
    b.add(0, 1, 2, 1.0, 0.5);
    b.add(1, 0, 2, 1.0, 2.0);
    b.add(1, 1, 2, 1.0, 0.5);
    b.mark_terminal(2);
    return b.build();
}

/// Random MDP with one successor per (state, action).
TabularMdp random_deterministic_mdp(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t states = 25;
    TabularMdpBuilder b(states, 3, 0.9);
    for (StateIndex s = 0; s < states; ++s) {
        if (s + 1 == states) {
            b.mark_terminal(s);
            continue;
        }
        for (ActionIndex a = 0; a < 3; ++a)
            b.add(s, a, static_cast<StateIndex>(rng.below(states)), 1.0, -1.0 + 2.0 * rng.uniform());
    }
    return b.build();
}

LearnConfig small_config(std::uint64_t seed) {
    LearnConfig cfg;
    cfg.episodes = 300;
    cfg.step_cap = 50;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_SUITE("rl") {

TEST_CASE("both learners converge to the self-loop fixed point") {
    LearnConfig cfg;
    cfg.episodes = 10;
    cfg.step_cap = 1000;
    cfg.epsilon = 0.0;
    const auto q = rl::q_learning(self_loop(), cfg);
    const auto s = rl::sarsa(self_loop(), cfg);
    CHECK(std::abs(q.table.at(0, 0) - 20.0) <= 0.5);
    CHECK(std::abs(s.table.at(0, 0) - 20.0) <= 0.5);
}

TEST_CASE("no signal and no exploration leaves the table at zero") {
    TabularMdpBuilder b(4, 2, 0.9);
    b.add(0, 0, 1, 1.0, 0.0);
    b.add(0, 1, 2, 1.0, 0.0);
    b.add(1, 0, 3, 1.0, 0.0);
    b.add(2, 1, 3, 1.0, 0.0);
    b.mark_terminal(3);
    const auto m = b.build();
    LearnConfig cfg = small_config(1);
    cfg.epsilon = 0.0;
    for (const auto& result : {rl::q_learning(m, cfg), rl::sarsa(m, cfg)})
        CHECK(std::all_of(result.table.q.begin(), result.table.q.end(),
                          [](double v) { return v == 0.0; }));
}

TEST_CASE("greedy SARSA and Q-learning perform identical updates on deterministic MDPs") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = random_deterministic_mdp(seed);
        LearnConfig cfg = small_config(seed);
        cfg.epsilon = 0.0;
        const auto q = rl::q_learning(m, cfg);
        const auto s = rl::sarsa(m, cfg);
        REQUIRE(q.table.q.size() == s.table.q.size());
        CHECK(std::memcmp(q.table.q.data(), s.table.q.data(), q.table.q.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("action values stay within the reward bounds") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = testing::random_cyclic_mdp(seed, 30, 3, 0.8);
        double r_min = 0.0;
        double r_max = 0.0;
        for (std::uint32_t k = 0; k < m.outcome_table().size(); ++k) {
            r_min = std::min(r_min, m.outcome(k).reward);
            r_max = std::max(r_max, m.outcome(k).reward);
        }
        LearnConfig cfg = small_config(seed);
        cfg.initial_q = 1.5;
        const double lo = std::min(cfg.initial_q, r_min / (1.0 - m.discount()));
        const double hi = std::max(cfg.initial_q, r_max / (1.0 - m.discount()));
        for (const auto& result : {rl::q_learning(m, cfg), rl::sarsa(m, cfg)}) {
            for (double v : result.table.q) {
                CHECK(v >= lo - 1e-9);
                CHECK(v <= hi + 1e-9);
            }
        }
    }
}

TEST_CASE("identical configuration gives identical table bytes") {
    const auto m = testing::random_cyclic_mdp(3, 40, 4, 0.9);
    const LearnConfig cfg = small_config(17);
    const auto a = rl::q_learning(m, cfg);
    const auto b = rl::q_learning(m, cfg);
    CHECK(std::memcmp(a.table.q.data(), b.table.q.data(), a.table.q.size() * sizeof(double)) == 0);
    const auto c = rl::sarsa(m, cfg);
    const auto d = rl::sarsa(m, cfg);
    CHECK(std::memcmp(c.table.q.data(), d.table.q.data(), c.table.q.size() * sizeof(double)) == 0);
    LearnConfig other = cfg;
    other.seed = 18;
    CHECK(rl::q_learning(m, other).table.q != a.table.q);
}

TEST_CASE("learned chain policy matches value iteration") {
    const auto m = two_state_chain();
    const auto vi = value_iteration(m);
    LearnConfig cfg;
    cfg.episodes = 2000;
    cfg.seed = 5;
    const auto q = rl::q_learning(m, cfg);
    const auto s = rl::sarsa(m, cfg);
    CHECK(q.policy.actions == vi.policy.actions);
    CHECK(s.policy.actions == vi.policy.actions);
    CHECK(q.table.at(0, 0) == doctest::Approx(vi.value_function.values[0]).epsilon(1e-3));
}

TEST_CASE("learning curve samples and stability flag") {
    const auto m = two_state_chain();
    LearnConfig cfg;
    cfg.episodes = 1000;
    cfg.seed = 2;
    cfg.start_state = 0;
    cfg.eval_interval = 100;
    cfg.eval_rollouts = 3;
    const auto result = rl::q_learning(m, cfg);
    REQUIRE(result.learning_curve.size() == 10);
    CHECK(result.learning_curve.back().episode == 1000);
    for (std::size_t k = 1; k < result.learning_curve.size(); ++k)
        CHECK(result.learning_curve[k].wall_time >= result.learning_curve[k - 1].wall_time);
    CHECK(result.policy_stable);
    CHECK(result.learning_curve.back().mean_return == doctest::Approx(1.0 + 0.9 * 2.0));
}

TEST_CASE("invalid hyperparameters are rejected") {
    const auto m = two_state_chain();
    LearnConfig cfg;
    cfg.episodes = 0;
    CHECK_THROWS_AS(rl::q_learning(m, cfg), ConfigError);
    cfg = {};
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(rl::sarsa(m, cfg), ConfigError);
    cfg = {};
    cfg.epsilon = 1.5;
    CHECK_THROWS_AS(rl::q_learning(m, cfg), ConfigError);
    cfg = {};
    cfg.epsilon_decay = 0.0;
    CHECK_THROWS_AS(rl::q_learning(m, cfg), ConfigError);
}

}
