#include <doctest.h>

#include "random_mdp.hpp"
#include "roverplan/errors.hpp"
#include "roverplan/mdp/brute_force.hpp"
#include "roverplan/mdp/simulate.hpp"
#include "roverplan/mdp/value_iteration.hpp"
#include "roverplan/rng.hpp"

#include <cmath>
#include <cstring>

using namespace roverplan;
using namespace roverplan::mdp;

namespace {

/// One non-terminal state with a single self-loop action.
TabularMdp self_loop(double reward, double discount) {
    TabularMdpBuilder b(1, 1, discount);
    b.add(0, 0, 0, 1.0, reward);
    return b.build();
}

/// Random MDP with cycles and one successor per (state, action).
TabularMdp random_deterministic_mdp(std::uint64_t seed, std::size_t states, std::size_t actions,
                                   double discount) {
    Rng rng(seed);
    TabularMdpBuilder b(states, actions, discount);
    for (StateIndex s = 0; s < states; ++s) {
        if (s + 1 == states) {
            b.mark_terminal(s);
            continue;
        }
        for (ActionIndex a = 0; a < actions; ++a)
            b.add(s, a, static_cast<StateIndex>(rng.below(states)), 1.0, -3.0 + 6.0 * rng.uniform());
    }
    return b.build();
}

} // namespace

TEST_SUITE("mdp_core") {

TEST_CASE("builder keeps entries sparse and validates structure") {
    TabularMdpBuilder b(3, 2, 0.9);
    b.add(0, 0, 1, 0.5, 1.0);
    b.add(0, 0, 2, 0.5, 2.0);
    b.add(0, 1, 2, 0.0, 7.0);
    b.add(1, 1, 2, 1.0, 0.0);
    b.mark_terminal(2);
    const TabularMdp m = b.build();
    CHECK(m.state_count() == 3);
    CHECK(m.entry_count() == 3);
    CHECK(m.has_action(0, 0));
    CHECK_FALSE(m.has_action(0, 1));
    CHECK_FALSE(m.has_action(1, 0));
    CHECK(m.is_terminal(2));
    double total = 0.0;
    for (const TransitionEntry e : m.transitions(0, 0))
        total += e.probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("validation rejects malformed MDPs") {
    SUBCASE("probabilities not summing to one") {
        TabularMdpBuilder b(2, 1, 0.9);
        b.add(0, 0, 1, 0.7, 0.0);
        b.mark_terminal(1);
        CHECK_THROWS_AS(b.build().validate(), ConfigError);
    }
    SUBCASE("non-terminal state without actions") {
        TabularMdpBuilder b(2, 1, 0.9);
        CHECK_THROWS_AS(b.build().validate(), ConfigError);
    }
    SUBCASE("out-of-order insertion") {
        TabularMdpBuilder b(2, 1, 0.9);
        b.add(1, 0, 0, 1.0, 0.0);
        CHECK_THROWS_AS(b.add(0, 0, 1, 1.0, 0.0), ContractViolation);
    }
    SUBCASE("bad discount") {
        TabularMdpBuilder b(1, 1, 1.5);
        b.add(0, 0, 0, 1.0, 0.0);
        CHECK_THROWS_AS(b.build().validate(), ConfigError);
    }
}

TEST_CASE("self-loop with reward 1 converges to the geometric sum") {
    const auto report = value_iteration(self_loop(1.0, 0.95), 1e-9, 100000);
    CHECK(report.converged);
    CHECK(report.value_function.values[0] == doctest::Approx(20.0).epsilon(1e-7));
}

TEST_CASE("one sweep from zero equals the best expected immediate reward") {
    const auto m = testing::random_cyclic_mdp(7, 30, 4, 0.9);
    const auto report = value_iteration(m, 1e-9, 1);
    for (StateIndex s = 0; s < m.state_count(); ++s) {
        if (m.is_terminal(s)) {
            CHECK(report.value_function.values[s] == 0.0);
            continue;
        }
        double best = -1e300;
        for (ActionIndex a = 0; a < m.action_count(); ++a) {
            if (!m.has_action(s, a))
                continue;
            double expected = 0.0;
            for (const TransitionEntry e : m.transitions(s, a))
                expected += e.probability * e.reward;
            best = std::max(best, expected);
        }
        CHECK(report.value_function.values[s] == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("policy extraction picks the singleton action and breaks ties low") {
    SUBCASE("single legal action") {
        TabularMdpBuilder b(2, 3, 0.9);
        b.add(0, 2, 1, 1.0, -4.0);
        b.mark_terminal(1);
        const auto m = b.build();
        CHECK(value_iteration(m).policy.actions[0] == 2);
    }
    SUBCASE("equal action values") {
        TabularMdpBuilder b(2, 2, 0.9);
        b.add(0, 0, 1, 1.0, 3.0);
        b.add(0, 1, 1, 1.0, 3.0);
        b.mark_terminal(1);
        const auto m = b.build();
        const auto report = value_iteration(m);
        CHECK(report.policy.actions[0] == 0);
        CHECK(report.policy.actions[1] == kNoAction);
    }
}

TEST_CASE("Bellman backup arithmetic") {
    SUBCASE("deterministic reward into a terminal state") {
        TabularMdpBuilder b(2, 1, 0.9);
        b.add(0, 0, 1, 1.0, 5.0);
        b.mark_terminal(1);
        const auto m = b.build();
        const ValueFunction v{{0.0, 0.0}};
        CHECK(bellman_backup(m, v, 0).value == doctest::Approx(5.0));
        CHECK_THROWS_AS(bellman_backup(m, v, 1), ContractViolation);
    }
    SUBCASE("expectation over two successors") {
        TabularMdpBuilder b(3, 1, 1.0);
        b.add(0, 0, 1, 0.5, 0.0);
        b.add(0, 0, 2, 0.5, 10.0);
        b.mark_terminal(1);
        b.mark_terminal(2);
        const auto m = b.build();
        CHECK(bellman_backup(m, ValueFunction{{0.0, 0.0, 0.0}}, 0).value == doctest::Approx(5.0));
    }
    SUBCASE("backup value dominates every action value") {
        const auto m = testing::random_cyclic_mdp(11, 40, 5, 0.8);
        Rng rng(3);
        ValueFunction v{std::vector<double>(m.state_count())};
        for (auto& x : v.values)
            x = -10.0 + 20.0 * rng.uniform();
        for (StateIndex s = 0; s < m.state_count(); ++s) {
            if (m.is_terminal(s))
                continue;
            const Backup backup = bellman_backup(m, v, s);
            for (ActionIndex a = 0; a < m.action_count(); ++a)
                if (m.has_action(s, a))
                    CHECK(backup.value >= q_value(m, v, s, a));
            CHECK(q_value(m, v, s, backup.best) == backup.value);
        }
    }
}

TEST_CASE("residuals contract by the discount factor") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const double discount = 0.5 + 0.04 * static_cast<double>(seed);
        const auto m = testing::random_cyclic_mdp(seed, 60, 4, discount);
        const auto report = value_iteration(m, 1e-10, 500);
        const auto& h = report.residual_history;
        REQUIRE(h.size() >= 2);
        // Absolute slack covers rounding once residuals approach 1e-10.
        for (std::size_t k = 0; k + 1 < h.size(); ++k)
            CHECK(h[k + 1] <= discount * h[k] + 1e-13);
    }
}

TEST_CASE("greedy consistency of a converged value function") {
    const double tol = 1e-8;
    const auto m = testing::random_cyclic_mdp(5, 80, 3, 0.9);
    const auto first = value_iteration(m, tol, 100000);
    ValueIterationOptions again;
    again.tolerance = tol;
    again.initial = first.value_function;
    const auto second = value_iteration(m, again);
    for (StateIndex s = 0; s < m.state_count(); ++s)
        CHECK(std::abs(second.value_function.values[s] - first.value_function.values[s]) <=
              tol / (1.0 - m.discount()));
    CHECK(extract_policy(m, first.value_function).actions == first.policy.actions);
}

TEST_CASE("positive reward scaling scales values and keeps the policy") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = testing::random_cyclic_mdp(seed, 50, 4, 0.9);
        const auto base = value_iteration(m, 1e-10, 100000);
        for (double c : {0.25, 3.0, 100.0}) {
            const auto scaled = value_iteration(m.with_scaled_rewards(c), 1e-10 * c, 100000);
            for (StateIndex s = 0; s < m.state_count(); ++s)
                CHECK(scaled.value_function.values[s] ==
                      doctest::Approx(c * base.value_function.values[s]).epsilon(1e-7));
            CHECK(scaled.policy.actions == base.policy.actions);
        }
    }
}

TEST_CASE("value iteration matches exhaustive search on random episodic MDPs") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto inst = testing::random_layered_mdp(seed);
        const auto report = value_iteration(inst.mdp, 1e-12, 1000);
        const double oracle = brute_force_return(inst.mdp, inst.start, inst.horizon);
        CHECK(report.value_function.values[inst.start] == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(std::abs(report.value_function.values[inst.start] - oracle) <= 1e-6);
    }
}

TEST_CASE("threaded sweeps are bitwise identical to sequential ones") {
    const auto m = testing::random_cyclic_mdp(21, 500, 4, 0.95);
    ValueIterationOptions seq;
    ValueIterationOptions par;
    par.threads = 3;
    const auto a = value_iteration(m, seq);
    const auto b = value_iteration(m, par);
    REQUIRE(a.value_function.values.size() == b.value_function.values.size());
    CHECK(std::memcmp(a.value_function.values.data(), b.value_function.values.data(),
                      a.value_function.values.size() * sizeof(double)) == 0);
    CHECK(a.policy.actions == b.policy.actions);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("value iteration reports caps and bad options") {
    const auto m = testing::random_cyclic_mdp(2, 20, 2, 0.99);
    const auto capped = value_iteration(m, 1e-12, 3);
    CHECK(capped.iterations == 3);
    CHECK_FALSE(capped.converged);
    CHECK(capped.residual_history.size() == 3);
    CHECK_THROWS_AS(value_iteration(m, 0.0, 10), ConfigError);
    CHECK_THROWS_AS(value_iteration(m, 1e-6, 0), ConfigError);
}

TEST_CASE("simulation") {
    SUBCASE("terminal start gives an empty trace") {
        TabularMdpBuilder b(2, 1, 0.9);
        b.add(0, 0, 1, 1.0, 1.0);
        b.mark_terminal(1);
        const auto m = b.build();
        const auto policy = value_iteration(m).policy;
        const Trace trace = simulate(m, policy, 1, 42);
        CHECK(trace.steps.empty());
        CHECK(trace.final_state == 1);
        CHECK(trace.discounted_return == 0.0);
    }
    SUBCASE("deterministic MDP traces do not depend on the seed") {
        const auto m = random_deterministic_mdp(4, 40, 3, 0.9);
        const auto policy = value_iteration(m).policy;
        const Trace a = simulate(m, policy, 0, 1, 200);
        const Trace b = simulate(m, policy, 0, 999, 200);
        REQUIRE(a.steps.size() == b.steps.size());
        for (std::size_t k = 0; k < a.steps.size(); ++k) {
            CHECK(a.steps[k].state == b.steps[k].state);
            CHECK(a.steps[k].action == b.steps[k].action);
        }
        CHECK(a.discounted_return == b.discounted_return);
    }
    SUBCASE("returns are the discounted sum of the step rewards") {
        const auto inst = testing::random_layered_mdp(9);
        const auto policy = value_iteration(inst.mdp).policy;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Trace t = simulate(inst.mdp, policy, inst.start, seed);
            double expected = 0.0;
            double factor = 1.0;
            for (const auto& step : t.steps) {
                expected += factor * step.reward;
                factor *= inst.mdp.discount();
            }
            CHECK(t.discounted_return == doctest::Approx(expected).epsilon(1e-12));
            CHECK(discounted_sum(t.steps, inst.mdp.discount()) ==
                  doctest::Approx(expected).epsilon(1e-12));
            CHECK(inst.mdp.is_terminal(t.final_state));
        }
    }
    SUBCASE("step cap stops non-terminating rollouts") {
        const auto m = self_loop(1.0, 0.5);
        const Trace t = simulate(m, value_iteration(m).policy, 0, 1, 5);
        CHECK(t.steps.size() == 5);
        CHECK(t.undiscounted_return == doctest::Approx(5.0));
    }
}

TEST_CASE("simulated return equals the exact policy value on deterministic MDPs") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto m = random_deterministic_mdp(seed, 30, 3, 0.9);
        const auto report = value_iteration(m, 1e-12, 100000);
        const auto exact = evaluate_policy_exact(m, report.policy, 1e-14);
        for (StateIndex s0 = 0; s0 < m.state_count(); ++s0) {
            // Long enough that the truncated tail is below 1e-9.
            const Trace t = simulate(m, report.policy, s0, seed, 400);
            CHECK(std::abs(t.discounted_return - exact.values[s0]) <= 1e-9);
        }
    }
}

TEST_CASE("return statistics") {
    SUBCASE("deterministic MDP has zero standard error") {
        const auto m = random_deterministic_mdp(3, 20, 2, 0.9);
        const auto stats = evaluate_policy(m, value_iteration(m).policy, 0, 25, 1, 300);
        CHECK(stats.std_error == 0.0);
    }
    SUBCASE("a single rollout gives its own return") {
        const auto inst = testing::random_layered_mdp(12);
        const auto policy = value_iteration(inst.mdp).policy;
        const auto stats = evaluate_policy(inst.mdp, policy, inst.start, 1, 77);
        CHECK(stats.mean == simulate(inst.mdp, policy, inst.start, 77).discounted_return);
        CHECK(stats.std_error == 0.0);
    }
    SUBCASE("sample statistics") {
        const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
        const auto stats = summarize_returns(xs);
        CHECK(stats.mean == doctest::Approx(2.5));
        CHECK(stats.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    }
    SUBCASE("stochastic rollouts average to the optimal value") {
        const auto inst = testing::random_layered_mdp(15);
        const auto report = value_iteration(inst.mdp);
        const auto stats = evaluate_policy(inst.mdp, report.policy, inst.start, 4000, 5);
        CHECK(std::abs(stats.mean - report.value_function.values[inst.start]) <=
              4.0 * stats.std_error + 1e-9);
    }
}

TEST_CASE("exhaustive search") {
    CHECK(brute_force_return(self_loop(1.0, 0.95), 0, 0) == 0.0);
    CHECK(brute_force_return(self_loop(1.0, 0.95), 0, 3) == doctest::Approx(2.8525));
    const auto m = testing::random_cyclic_mdp(1, 30, 4, 0.9);
    CHECK_THROWS_AS(brute_force_return(m, 0, 40, 1000), ResourceError);
}

TEST_CASE("seed derivation is stable and spreads streams") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
    Rng a(9);
    Rng b(9);
    for (int k = 0; k < 100; ++k) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng c(4);
    for (int k = 0; k < 100; ++k)
        CHECK(c.below(7) < 7);
}

}
