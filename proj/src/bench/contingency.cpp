#include "roverplan/bench/contingency.hpp"

#include "roverplan/errors.hpp"
#include "roverplan/mdp/simulate.hpp"
#include "roverplan/mdp/value_iteration.hpp"
#include "roverplan/rng.hpp"

#include <chrono>

namespace roverplan::bench {

ContingencyPlanner::ContingencyPlanner(const rover::GridConfig& cfg, SolverKind solver,
                                       const bilevel::SolverSettings& settings,
                                       const bilevel::HeuristicSpec& heuristic)
    : solver_(solver) {
    if (solver == SolverKind::vi) {
        env_ = std::make_unique<rover::RoverGridWorld>(cfg);
        flat_ = rover::enumerate(*env_);
        mdp::ValueIterationOptions options;
        options.tolerance = settings.tolerance;
        options.max_iterations = settings.max_iterations;
        options.threads = settings.threads;
        const mdp::SolveReport report = mdp::value_iteration(flat_->mdp, options);
        flat_policy_ = report.policy;
        solve_time_ = report.wall_time;
    } else if (solver == SolverKind::bl_vi) {
        bilevel_.emplace(bilevel::solve_bilevel(cfg, bilevel::MissionSpec::all_targets(cfg), heuristic, settings));
        solve_time_ = bilevel_->stats().aggregate_wall_time();
    } else {
        throw ConfigError("contingency planning supports the vi and bl_vi solvers");
    }
}

const rover::RoverGridWorld& ContingencyPlanner::env() const {
    return bilevel_ ? bilevel_->env() : *env_;
}

std::size_t ContingencyPlanner::ll_solves() const {
    return bilevel_ ? bilevel_->stats().ll_solves : 0;
}

ContingencyEntry ContingencyPlanner::query(const RoverState& s, std::uint64_t seed) {
    ContingencyEntry entry;
    entry.state = s;
    const auto index = env().indexer().index_of(s);
    if (!index) {
        entry.error = "not a valid rover state";
        return entry;
    }
    if (env().is_terminal(s)) {
        entry.error = "state is already terminal";
        return entry;
    }
    const std::size_t solves_before = ll_solves();
    const auto start = std::chrono::steady_clock::now();
    if (bilevel_) {
        const bilevel::PlanResult result = bilevel::plan(*bilevel_, s, seed);
        entry.trace = result.trace;
        entry.discounted_return = result.discounted_return;
    } else {
        entry.trace = mdp::simulate(flat_->mdp, flat_policy_, *index, seed);
        entry.discounted_return = entry.trace.discounted_return;
    }
    entry.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    entry.new_ll_solves = ll_solves() - solves_before;
    return entry;
}

ContingencyReport run_contingency(const rover::GridConfig& cfg, const std::vector<RoverState>& states,
                                  SolverKind solver, std::uint64_t seed,
                                  const bilevel::SolverSettings& settings,
                                  const bilevel::HeuristicSpec& heuristic) {
    ContingencyPlanner planner(cfg, solver, settings, heuristic);
    ContingencyReport report;
    report.solve_time_s = planner.solve_time();
    for (std::size_t k = 0; k < states.size(); ++k)
        report.entries.push_back(planner.query(states[k], seed + k));
    return report;
}

std::vector<RoverState> random_off_nominal_states(const rover::RoverGridWorld& env, std::size_t count,
                                                  std::uint64_t seed) {
    const rover::StateIndexer& index = env.indexer();
    Rng rng(seed);
    std::vector<RoverState> out;
    while (out.size() < count) {
        const RoverState s = *index.state_of(static_cast<StateIndex>(rng.below(index.rover_state_count())));
        if (!env.is_terminal(s))
            out.push_back(s);
    }
    return out;
}

} // namespace roverplan::bench
