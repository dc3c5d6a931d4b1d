#include <doctest.h>

#include "grid_fixtures.hpp"
#include "roverplan/bilevel/high_level.hpp"
#include "roverplan/bilevel/planner.hpp"
#include "roverplan/errors.hpp"
#include "roverplan/mdp/simulate.hpp"
#include "roverplan/mdp/value_iteration.hpp"
#include "roverplan/rover/enumerate.hpp"
#include "roverplan/rover/render.hpp"

#include <thread>

using namespace roverplan;
using namespace roverplan::bilevel;
using rover::GridConfig;
using rover::RoverAction;
using rover::RoverGridWorld;
using testing::empty_grid;
using testing::hibernation_target;
using testing::science_target;

namespace {

MissionSpec all_of(const GridConfig& cfg) {
    return MissionSpec::all_targets(cfg);
}

/// Recomputes a plan's return from its trace with the flat reward function
/// and checks that every step is a legal flat transition.
struct TraceAudit {
    double discounted_return = 0.0;
    bool feasible = true;
};

TraceAudit audit(const RoverGridWorld& env, const rover::FlatMdp& flat, const PlanResult& result) {
    TraceAudit out;
    const auto& steps = result.trace.steps;
    double factor = 1.0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const StateIndex next =
            k + 1 < steps.size() ? steps[k + 1].state : result.trace.final_state;
        bool found = false;
        for (const mdp::TransitionEntry e : flat.mdp.transitions(steps[k].state, steps[k].action))
            found = found || (e.next == next && e.probability > 0.0);
        out.feasible = out.feasible && found;
        const RoverState s = *flat.index.state_of(steps[k].state);
        rover::Successor successor;
        if (next == flat.index.sink())
            successor.ends_episode = true;
        else
            successor.state = *flat.index.state_of(next);
        out.discounted_return +=
            factor * env.reward(s, static_cast<RoverAction>(steps[k].action), successor).total;
        factor *= env.discount();
    }
    return out;
}

std::vector<GridConfig> deterministic_instances() {
    std::vector<GridConfig> out;
    GridConfig full = testing::small_full_instance();
    full.activity_durations = {1.0, 0.0, 0.0};
    out.push_back(full);
    out.push_back(testing::small_simplified_instance());
    for (std::uint64_t seed = 2; seed <= 12; seed += 2)
        out.push_back(testing::random_small_instance(seed));
    return out;
}

} // namespace

TEST_SUITE("bilevel") {

TEST_CASE("state split is lossless") {
    for (const GridConfig& cfg : {testing::small_full_instance(), testing::small_simplified_instance()}) {
        const RoverGridWorld env(cfg);
        const auto& index = env.indexer();
        for (StateIndex i = 0; i < index.rover_state_count(); ++i) {
            const RoverState s = *index.state_of(i);
            CHECK(merge(telemetry_of(s), tracking_of(s)) == s);
            for (TargetId focal = 0; focal < cfg.targets.size(); ++focal)
                CHECK(update_hl_state(s, subset_of(s, focal), focal, FlagEvents{}) == s);
        }
    }
    const RoverState base{2, 2, 3, 0b01, 0b00, 0};
    const LowLevelState done{{4, 1, 6}, true};
    const RoverState lifted = update_hl_state(base, done, 1, FlagEvents{0b10, 0b10, 0});
    CHECK(lifted == RoverState{4, 1, 6, 0b11, 0b10, 0});
}

TEST_CASE("mission and heuristic validation") {
    const GridConfig cfg = testing::small_full_instance();
    CHECK_THROWS_AS(MissionSpec{}.validate(cfg), ConfigError);
    CHECK_THROWS_AS(MissionSpec{{7}}.validate(cfg), ConfigError);
    CHECK_NOTHROW(all_of(cfg).validate(cfg));
    HeuristicSpec h;
    h.speed_slack = 0.9;
    CHECK_THROWS_AS(h.validate(), ConfigError);
    h = {};
    h.activity_time_estimate = -1;
    CHECK_THROWS_AS(h.validate(), ConfigError);
}

TEST_CASE("coarse heuristic arithmetic") {
    GridConfig cfg = empty_grid(10, 10, 30, false);
    cfg.targets = {science_target(0, {8, 5}, 30), science_target(1, {1, 10}, 30),
                   hibernation_target(2, {10, 10}, 30)};
    cfg.targets[1].window = {0, 10};
    const RoverGridWorld env(cfg);
    HeuristicSpec spec;

    SUBCASE("standing on the target costs only the activity estimate") {
        spec.speed_slack = 1.0;
        const CoarseHeuristic h(env, all_of(cfg), spec);
        const auto out = h.transition(RoverState{8, 5, 4}, 0);
        CHECK(out.feasible);
        CHECK(out.duration == 2);
        CHECK(out.next == RoverState{8, 5, 6, 1, 1, 0});
        CHECK(out.estimated_reward == 55.0);
    }
    SUBCASE("travel time is the slackened Manhattan distance rounded up") {
        spec.activity_time_estimate = 0;
        const CoarseHeuristic h(env, all_of(cfg), spec);
        // Distance 7 from (1,5) to (8,5): ceil(7 * 1.2) = 9.
        const auto out = h.transition(RoverState{1, 5, 0}, 0);
        CHECK(out.duration == 9);
        CHECK(out.next.t == 9);
    }
    SUBCASE("targets that cannot be reached in their window are infeasible") {
        const CoarseHeuristic h(env, all_of(cfg), spec);
        // Distance 9 to (1,10) needs 11 + 2 timesteps; the window closes at 10.
        const auto out = h.transition(RoverState{1, 1, 0}, 1);
        CHECK_FALSE(out.feasible);
        CHECK(out.next == RoverState{1, 1, 0});
        CHECK(out.estimated_reward == 0.0);
    }
    SUBCASE("hibernation only needs arrival before the horizon") {
        const CoarseHeuristic h(env, all_of(cfg), spec);
        const auto out = h.transition(RoverState{9, 9, 27}, 2);
        CHECK(out.feasible);
        CHECK(out.next.t == 30);
        CHECK(out.estimated_reward == 10.0);
        CHECK_FALSE(h.transition(RoverState{5, 9, 27}, 2).feasible);
    }
    SUBCASE("done targets are infeasible") {
        const CoarseHeuristic h(env, all_of(cfg), spec);
        CHECK_FALSE(h.transition(RoverState{1, 1, 0, 1, 1, 0}, 0).feasible);
    }
    SUBCASE("waiting for a window to open") {
        GridConfig late = cfg;
        late.targets[0].window = {20, 30};
        const RoverGridWorld late_env(late);
        const CoarseHeuristic h(late_env, all_of(late), spec);
        CHECK(h.transition(RoverState{8, 4, 0}, 0).next.t == 20);
    }
    SUBCASE("large penalties on the route are charged") {
        GridConfig blocked = cfg;
        blocked.shadows.obstacles = {{8, 2}, {2, 5}};
        const RoverGridWorld blocked_env(blocked);
        const CoarseHeuristic h(blocked_env, all_of(blocked), spec);
        // From (8,1) both L-routes are the straight column through (8,2).
        CHECK(h.transition(RoverState{8, 1, 0}, 0).estimated_reward == 45.0);
        // From (1,4) the y-first route avoids (2,5), so nothing is charged.
        CHECK(h.transition(RoverState{1, 4, 0}, 0).estimated_reward == 55.0);
    }
    SUBCASE("standing on an unentered target in simplified mode") {
        GridConfig simple = empty_grid(5, 5, 10, true);
        simple.targets = {science_target(0, {3, 3}, 10)};
        const RoverGridWorld simple_env(simple);
        const CoarseHeuristic h(simple_env, all_of(simple), spec);
        CHECK_FALSE(h.transition(RoverState{3, 3, 0}, 0).feasible);
        CHECK(h.transition(RoverState{3, 2, 0}, 0).feasible);
    }
}

TEST_CASE("high-level MDP structure") {
    SUBCASE("one action per mission target") {
        GridConfig cfg = empty_grid(4, 4, 6, false);
        cfg.targets = {science_target(0, {3, 3}, 6)};
        const RoverGridWorld env(cfg);
        CHECK(build_high_level(env, all_of(cfg), HeuristicSpec{}).action_count() == 1);
        const RoverGridWorld full(testing::small_full_instance());
        CHECK(build_high_level(full, all_of(full.config()), HeuristicSpec{}).action_count() == 3);
    }
    SUBCASE("state count equals the flat state count") {
        for (const GridConfig& cfg : {testing::small_full_instance(), testing::small_simplified_instance()}) {
            const RoverGridWorld env(cfg);
            const auto hl = build_high_level(env, all_of(cfg), HeuristicSpec{});
            CHECK(hl.state_count() == rover::flat_state_count(cfg));
            CHECK_NOTHROW(hl.validate());
        }
    }
    SUBCASE("done targets are zero-reward self-loops") {
        const GridConfig cfg = testing::small_full_instance();
        const RoverGridWorld env(cfg);
        const auto hl = build_high_level(env, all_of(cfg), HeuristicSpec{});
        const RoverState s{1, 1, 0, 0b01, 0b01, 0};
        const StateIndex i = *env.indexer().index_of(s);
        REQUIRE_FALSE(hl.is_terminal(i));
        const auto entries = hl.packed(i, 0);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].next == i);
        CHECK(hl.outcome(entries[0].outcome).reward == 0.0);
        CHECK(hl.outcome(entries[0].outcome).probability == 1.0);
    }
    SUBCASE("terminal states") {
        const GridConfig cfg = testing::small_full_instance();
        const RoverGridWorld env(cfg);
        const auto hl = build_high_level(env, all_of(cfg), HeuristicSpec{});
        CHECK(hl.is_terminal(*env.indexer().index_of(RoverState{4, 4, 2})));
        CHECK(hl.is_terminal(*env.indexer().index_of(RoverState{1, 1, 2, 0b11, 0b11, 0})));
        CHECK(hl.is_terminal(env.indexer().sink()));
        CHECK_FALSE(hl.is_terminal(*env.indexer().index_of(RoverState{1, 1, 2})));
        // No target fits into the single remaining step from far away.
        CHECK(hl.is_terminal(*env.indexer().index_of(RoverState{1, 1, 8})));
    }
}

TEST_CASE("low-level MDPs") {
    SUBCASE("state count is telemetry times the focal measured bit") {
        for (std::size_t n : {1u, 3u}) {
            GridConfig cfg = empty_grid(10, 10, 20, false);
            for (TargetId id = 0; id < n; ++id)
                cfg.targets.push_back(science_target(id, {2 + 2 * static_cast<int>(id), 5}, 20));
            const RoverGridWorld env(cfg);
            const auto ll = LowLevelMdp::for_target(env, 0);
            CHECK(ll.telemetry_state_count() == 10u * 10 * 21 * 2);
            CHECK_NOTHROW(ll.mdp().validate());
        }
    }
    SUBCASE("rewards exclude other targets' payouts") {
        GridConfig cfg = empty_grid(4, 4, 6, false);
        cfg.targets = {science_target(0, {2, 2}, 6, 5.0, 50.0), science_target(1, {3, 2}, 6, 3.0, 40.0)};
        const RoverGridWorld env(cfg);
        const auto ll = LowLevelMdp::for_target(env, 0);
        const StateIndex s = ll.index_of({{2, 3, 0}, false});
        const auto measure = static_cast<ActionIndex>(RoverAction::measure);
        const auto entries = ll.mdp().transitions(s, measure);
        REQUIRE(std::ranges::distance(entries) == 1);
        CHECK((*entries.begin()).reward == 5.0);
        const auto flat_step = env.step(RoverState{2, 3, 0}, RoverAction::measure)[0].next;
        CHECK(env.reward(RoverState{2, 3, 0}, RoverAction::measure, flat_step).total == 8.0);
    }
    SUBCASE("simplified terminal set") {
        GridConfig cfg = testing::small_simplified_instance();
        const RoverGridWorld env(cfg);
        for (TargetId focal : {0u, 1u}) {
            const auto ll = LowLevelMdp::for_target(env, focal);
            const auto& tgt = cfg.targets[focal];
            for (StateIndex i = 0; i < ll.telemetry_state_count(); ++i) {
                const auto tm = ll.state_of(i)->telemetry;
                const rover::Cell c{tm.x, tm.y};
                const bool expected = (c == tgt.cell && tm.t >= tgt.window.open) || tm.t == cfg.horizon ||
                                      env.is_goal_cell(c);
                CHECK(ll.mdp().is_terminal(i) == expected);
            }
        }
    }
    SUBCASE("full-mode target problems end when the focal target is drilled") {
        const GridConfig cfg = testing::small_full_instance();
        const RoverGridWorld env(cfg);
        const auto ll = LowLevelMdp::for_target(env, 0);
        const StateIndex s = ll.index_of({{2, 3, 1}, true});
        for (const mdp::TransitionEntry e : ll.mdp().transitions(s, static_cast<ActionIndex>(RoverAction::drill)))
            CHECK(e.next == ll.absorbing());
        CHECK(ll.project(RoverState{2, 3, 4, 1, 1, 0}) == ll.absorbing());
        CHECK(ll.project(RoverState{2, 3, 4, 1, 0, 0}) == ll.index_of({{2, 3, 4}, true}));
    }
}

TEST_CASE("low-level cache") {
    SUBCASE("a one-target mission triggers one solve, then none") {
        GridConfig cfg = empty_grid(5, 5, 10, false);
        cfg.targets = {science_target(0, {4, 4}, 10)};
        auto policy = solve_bilevel(cfg, all_of(cfg));
        CHECK(policy.stats().ll_solves == 0);
        plan(policy, RoverState{}, 1);
        CHECK(policy.stats().ll_solves == 1);
        CHECK(policy.is_cached(0));
        plan(policy, RoverState{}, 1);
        plan(policy, RoverState{2, 1, 0}, 5);
        CHECK(policy.stats().ll_solves == 1);
        CHECK(policy.stats().wind_down_solves <= 1);
    }
    SUBCASE("concurrent requests share one entry") {
        const GridConfig cfg = testing::small_full_instance();
        auto policy = solve_bilevel(cfg, all_of(cfg));
        const LowLevelSolution* a = nullptr;
        const LowLevelSolution* b = nullptr;
        {
            std::jthread first([&] { a = &policy.low_level(1); });
            std::jthread second([&] { b = &policy.low_level(1); });
        }
        CHECK(a == b);
        CHECK(&policy.low_level(1) == a);
        CHECK_THROWS_AS(policy.low_level(9), ContractViolation);
    }
}

TEST_CASE("plans are feasible flat trajectories scored by the flat reward") {
    for (GridConfig cfg : {testing::small_full_instance(), testing::small_simplified_instance()}) {
        const RoverGridWorld env(cfg);
        const auto flat = rover::enumerate(env);
        auto policy = solve_bilevel(cfg, all_of(cfg));
        for (StateIndex i = 0; i < flat.index.rover_state_count(); i += 7) {
            const RoverState s0 = *flat.index.state_of(i);
            if (env.is_terminal(s0))
                continue;
            const auto result = plan(policy, s0, i);
            const auto check = audit(env, flat, result);
            CHECK(check.feasible);
            CHECK(std::abs(check.discounted_return - result.discounted_return) <= 1e-9);
            CHECK(result.trace.discounted_return == result.discounted_return);
            if (!result.trace.steps.empty())
                CHECK(result.trace.steps.front().state == i);
            CHECK((flat.mdp.is_terminal(result.trace.final_state) || result.final_state.has_value()));
        }
    }
}

TEST_CASE("bi-level never beats the flat optimum on deterministic instances") {
    for (const GridConfig& cfg : deterministic_instances()) {
        const RoverGridWorld env(cfg);
        const auto flat = rover::enumerate(env);
        const auto report = mdp::value_iteration(flat.mdp, 1e-10, 10000);
        auto policy = solve_bilevel(cfg, all_of(cfg));
        for (StateIndex i = 0; i < flat.index.rover_state_count(); i += 3) {
            const RoverState s0 = *flat.index.state_of(i);
            if (env.is_terminal(s0))
                continue;
            CHECK(plan(policy, s0, 1).discounted_return <= report.value_function.values[i] + 1e-6);
        }
    }
}

TEST_CASE("plans from states with every target done") {
    const GridConfig cfg = testing::small_full_instance();
    auto policy = solve_bilevel(cfg, all_of(cfg));
    const auto result = plan(policy, RoverState{1, 1, 0, 0b11, 0b11, 0}, 3);
    CHECK(result.hl_decisions.empty());
    // Only hibernation, penalties and the end penalty remain.
    CHECK(result.discounted_return <= 10.0);
    CHECK(policy.stats().ll_solves == 0);
}

TEST_CASE("plan rejects invalid start states") {
    const GridConfig cfg = testing::small_full_instance();
    auto policy = solve_bilevel(cfg, all_of(cfg));
    CHECK_THROWS_AS(plan(policy, RoverState{9, 9, 0}, 1), ContractViolation);
    CHECK_THROWS_AS(plan(policy, RoverState{1, 1, 0, 0, 1, 0}, 1), ContractViolation);
}

TEST_CASE("starting on an unentered simplified target does not stall") {
    const auto doc = testing::shipped_config("exp1.json");
    auto policy = solve_bilevel(doc.grid, all_of(doc.grid));
    const auto& first = doc.grid.targets[0];
    const auto result = plan(policy, RoverState{first.cell.x, first.cell.y, 0}, 1);
    REQUIRE_FALSE(result.hl_decisions.empty());
    CHECK(result.hl_decisions.front().target != 0);
    CHECK(result.discounted_return > 50.0);
}

TEST_CASE("exact heuristic follows the low-level rollout") {
    const auto doc = testing::shipped_config("exp1.json");
    const GridConfig& cfg = doc.grid;
    REQUIRE(cfg.deterministic_durations());
    const RoverGridWorld env(cfg);
    HeuristicSpec exact;
    exact.mode = HeuristicMode::exact;
    auto policy = solve_bilevel(cfg, all_of(cfg), exact);
    CHECK(policy.heuristic().mode == HeuristicMode::exact);
    CHECK(policy.stats().ll_solves == cfg.targets.size());

    for (TargetId target = 0; target < cfg.targets.size(); ++target) {
        const auto& ll = policy.low_level(target);
        for (const RoverState s0 : {RoverState{1, 1, 0}, RoverState{5, 2, 3}, RoverState{9, 1, 0}}) {
            const auto out = exact_transition(env, ll.problem, ll.report.policy, s0);
            // Independent rollout inside the low-level MDP itself.
            const StateIndex start = ll.problem.project(s0);
            const auto rollout = mdp::simulate(ll.problem.mdp(), ll.report.policy, start, 1);
            const auto final_ll = ll.problem.state_of(rollout.final_state);
            REQUIRE(final_ll.has_value());
            CHECK(telemetry_of(out.next) == final_ll->telemetry);
            // The flat reward adds any other target entered on the way.
            CHECK(out.estimated_reward >= rollout.discounted_return - 1e-9);
            CHECK(out.duration == out.next.t - s0.t);
        }
    }
}

TEST_CASE("exact heuristic falls back on stochastic instances") {
    const GridConfig cfg = testing::small_full_instance();
    HeuristicSpec exact;
    exact.mode = HeuristicMode::exact;
    auto policy = solve_bilevel(cfg, all_of(cfg), exact);
    CHECK(policy.heuristic().mode == HeuristicMode::coarse);
    const RoverGridWorld env(cfg);
    const auto ll = LowLevelMdp::for_target(env, 0);
    CHECK_THROWS_AS(exact_transition(env, ll, mdp::value_iteration(ll.mdp()).policy, RoverState{}),
                    ContractViolation);
}

TEST_CASE("sweep-operation counters favour the decomposition") {
    for (const char* name : {"exp1.json", "exp2_small.json"}) {
        const auto doc = testing::shipped_config(name);
        const auto flat = rover::enumerate(doc.grid);
        const auto flat_report = mdp::value_iteration(flat.mdp);
        auto policy = solve_bilevel(doc.grid, all_of(doc.grid));
        plan(policy, RoverState{}, 1);
        const auto stats = policy.stats();
        CHECK(stats.hl_backups_per_sweep + stats.ll_backups_per_sweep < flat_report.backups_per_sweep);
        CHECK(stats.ll_solves >= 1);
        CHECK(stats.converged);
        CHECK(stats.aggregate_wall_time() ==
              doctest::Approx(stats.hl_wall_time + stats.ll_wall_time + stats.wind_down_wall_time));
    }
}

TEST_CASE("small two-target instance: bi-level and flat paths coincide") {
    const auto doc = testing::shipped_config("exp2_small.json");
    const RoverGridWorld env(doc.grid);
    const auto flat = rover::enumerate(env);
    const auto report = mdp::value_iteration(flat.mdp);
    auto policy = solve_bilevel(doc.grid, all_of(doc.grid));
    const RoverState s0{};
    const auto flat_trace = mdp::simulate(flat.mdp, report.policy, *flat.index.index_of(s0), 1);
    const auto bl = plan(policy, s0, 1);
    CHECK(rover::trace_cells(env, flat_trace) == rover::trace_cells(env, bl.trace));
    CHECK(bl.discounted_return == doctest::Approx(flat_trace.discounted_return).epsilon(1e-9));
}

}
