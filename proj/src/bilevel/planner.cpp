#include "roverplan/bilevel/planner.hpp"

#include "roverplan/bilevel/high_level.hpp"
#include "roverplan/errors.hpp"
#include "roverplan/mdp/simulate.hpp"
#include "roverplan/rng.hpp"

#include <algorithm>
#include <iostream>

namespace roverplan::bilevel {

namespace {

mdp::SolveReport solve(const mdp::TabularMdp& problem, const SolverSettings& settings) {
    mdp::ValueIterationOptions options;
    options.tolerance = settings.tolerance;
    options.max_iterations = settings.max_iterations;
    options.threads = settings.threads;
    return mdp::value_iteration(problem, options);
}

} // namespace

BiLevelPolicy::BiLevelPolicy(rover::GridConfig cfg, MissionSpec mission, HeuristicSpec heuristic,
                             SolverSettings settings)
    : env_(std::make_unique<rover::RoverGridWorld>(std::move(cfg))), mission_(std::move(mission)),
      heuristic_(heuristic), settings_(settings), cache_(std::make_unique<Cache>()) {
    mission_.validate(env_->config());
    heuristic_.validate();
    solve_high_level();
}

void BiLevelPolicy::solve_high_level() {
    if (heuristic_.mode == HeuristicMode::exact && !env_->config().deterministic_durations()) {
        std::cerr << "warning: exact heuristic needs deterministic activity durations; "
                     "falling back to the coarse heuristic\n";
        heuristic_.mode = HeuristicMode::coarse;
    }
    if (heuristic_.mode == HeuristicMode::exact) {
        std::vector<const LowLevelSolution*> solved;
        for (TargetId id : mission_.targets)
            solved.push_back(&low_level(id));
        hl_mdp_ = build_high_level(*env_, mission_, [&](const RoverState& s, std::size_t slot) {
            return exact_transition(*env_, solved[slot]->problem, solved[slot]->report.policy, s);
        });
    } else {
        hl_mdp_ = build_high_level(*env_, mission_, heuristic_);
    }
    hl_report_ = solve(hl_mdp_, settings_);
}

BiLevelStats BiLevelPolicy::stats() const {
    std::lock_guard lock(cache_->mutex);
    BiLevelStats out = cache_->stats;
    out.hl_wall_time = hl_report_.wall_time;
    out.hl_backups_per_sweep = hl_report_.backups_per_sweep;
    out.converged = out.converged && hl_report_.converged;
    return out;
}

const LowLevelSolution& BiLevelPolicy::low_level(TargetId target) {
    if (std::find(mission_.targets.begin(), mission_.targets.end(), target) == mission_.targets.end())
        throw ContractViolation("target " + std::to_string(target) + " is not part of the mission");
    return solve_cached(target);
}

const LowLevelSolution& BiLevelPolicy::wind_down() {
    return solve_cached(std::nullopt);
}

bool BiLevelPolicy::is_cached(TargetId target) const {
    std::lock_guard lock(cache_->mutex);
    return cache_->targets.count(target) != 0;
}

const LowLevelSolution& BiLevelPolicy::solve_cached(std::optional<TargetId> target) {
    {
        std::lock_guard lock(cache_->mutex);
        if (target) {
            if (auto it = cache_->targets.find(*target); it != cache_->targets.end())
                return *it->second;
        } else if (cache_->wind_down) {
            return *cache_->wind_down;
        }
    }

    LowLevelMdp problem = target ? LowLevelMdp::for_target(*env_, *target) : LowLevelMdp::wind_down(*env_);
    mdp::SolveReport report = solve(problem.mdp(), settings_);
    auto solution = std::make_unique<LowLevelSolution>(LowLevelSolution{std::move(problem), std::move(report)});

    std::lock_guard lock(cache_->mutex);
    BiLevelStats& stats = cache_->stats;
    stats.converged = stats.converged && solution->report.converged;
    stats.ll_backups_per_sweep = std::max(stats.ll_backups_per_sweep, solution->report.backups_per_sweep);
    if (target) {
        stats.ll_wall_time += solution->report.wall_time;
        ++stats.ll_solves;
        auto [it, inserted] = cache_->targets.try_emplace(*target, std::move(solution));
        return *it->second;
    }
    stats.wind_down_wall_time += solution->report.wall_time;
    ++stats.wind_down_solves;
    if (!cache_->wind_down)
        cache_->wind_down = std::move(solution);
    return *cache_->wind_down;
}

BiLevelPolicy solve_bilevel(const rover::GridConfig& cfg, const MissionSpec& mission,
                            const HeuristicSpec& heuristic, const SolverSettings& settings) {
    return BiLevelPolicy(cfg, mission, heuristic, settings);
}

PlanResult plan(BiLevelPolicy& policy, const RoverState& s0, std::uint64_t seed) {
    const rover::RoverGridWorld& env = policy.env();
    const rover::StateIndexer& index = env.indexer();
    if (!index.index_of(s0))
        throw ContractViolation("plan start state is not a valid rover state");

    Rng rng(seed);
    PlanResult result;
    RoverState s = s0;
    bool ended = false;

    // Follows a low-level policy in the flat environment until the low-level
    // problem terminates or the episode ends.
    auto run = [&](const LowLevelSolution& ll) {
        const LowLevelMdp& problem = ll.problem;
        StateIndex li = problem.project(s);
        while (!problem.mdp().is_terminal(li)) {
            const ActionIndex a = ll.report.policy.actions[li];
            if (a >= env.action_count())
                throw ContractViolation("low-level policy has no action at state " + std::to_string(li));
            const auto action = static_cast<rover::RoverAction>(a);
            const auto dist = env.step(s, action);
            const std::size_t pick = mdp::sample_successor(
                rng, dist.size(), [&](std::size_t k) { return dist[k].probability; });
            const auto& next = dist[pick].next;
            result.trace.steps.push_back(
                {index.index_unchecked(s), a, env.reward(s, action, next).total});
            if (next.ends_episode) {
                ended = true;
                return;
            }
            s = next.state;
            li = problem.project(s);
        }
    };

    const mdp::TabularMdp& hl = policy.hl_mdp();
    while (!env.is_terminal(s)) {
        const StateIndex hs = index.index_unchecked(s);
        if (hl.is_terminal(hs))
            break;
        const ActionIndex k = policy.hl_policy().actions[hs];
        const TargetId target = policy.mission().targets[k];
        result.hl_decisions.push_back({hs, target});
        const auto entries = hl.packed(hs, k);
        if (entries.size() == 1 && entries[0].next == hs)
            break;
        const LowLevelSolution& ll = policy.low_level(target);
        if (ll.problem.mdp().is_terminal(ll.problem.project(s)))
            break;
        run(ll);
        if (ended)
            break;
    }
    if (!ended && !env.is_terminal(s))
        run(policy.wind_down());

    result.trace.final_state = ended ? index.sink() : index.index_unchecked(s);
    if (!ended)
        result.final_state = s;
    result.trace.discounted_return = mdp::discounted_sum(result.trace.steps, env.discount());
    for (const auto& step : result.trace.steps)
        result.trace.undiscounted_return += step.reward;
    result.discounted_return = result.trace.discounted_return;
    return result;
}

} // namespace roverplan::bilevel
