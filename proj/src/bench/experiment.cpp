#include "roverplan/bench/experiment.hpp"

#include "roverplan/bilevel/planner.hpp"
#include "roverplan/errors.hpp"
#include "roverplan/mdp/simulate.hpp"
#include "roverplan/mdp/value_iteration.hpp"
#include "roverplan/rng.hpp"
#include "roverplan/rover/enumerate.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace roverplan::bench {

namespace {

constexpr std::array<std::string_view, 4> kSolverTags{"vi", "bl_vi", "qlearning", "sarsa"};

struct Evaluated {
    double wall_time = 0.0;
    mdp::ReturnStats stats;
    bool converged = false;
};

/// Rollout k starts from starts[k % size] with seed base_seed + k.
mdp::ReturnStats evaluate_flat(const rover::FlatMdp& flat, const mdp::Policy& policy,
                               const std::vector<RoverState>& starts, std::size_t n,
                               std::uint64_t base_seed) {
    std::vector<double> returns;
    returns.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const StateIndex s0 = *flat.index.index_of(starts[k % starts.size()]);
        returns.push_back(mdp::simulate(flat.mdp, policy, s0, base_seed + k).discounted_return);
    }
    return mdp::summarize_returns(returns);
}

Evaluated run_vi(const ExperimentSpec& spec, const rover::FlatMdp& flat,
                 const std::vector<RoverState>& starts, std::size_t cap) {
    mdp::ValueIterationOptions options;
    options.tolerance = spec.tolerance;
    options.max_iterations = cap;
    if (spec.warm_up)
        mdp::value_iteration(flat.mdp, options);
    const mdp::SolveReport report = mdp::value_iteration(flat.mdp, options);
    return {report.wall_time, evaluate_flat(flat, report.policy, starts, spec.n_sims, spec.base_seed),
            report.converged};
}

Evaluated run_bilevel(const ExperimentSpec& spec, const std::vector<RoverState>& starts,
                      std::size_t cap) {
    bilevel::SolverSettings settings;
    settings.tolerance = spec.tolerance;
    settings.max_iterations = cap;
    const auto mission = bilevel::MissionSpec::all_targets(spec.problem);
    auto execute = [&] {
        bilevel::BiLevelPolicy policy = bilevel::solve_bilevel(spec.problem, mission, spec.heuristic, settings);
        std::vector<double> returns;
        returns.reserve(spec.n_sims);
        for (std::size_t k = 0; k < spec.n_sims; ++k)
            returns.push_back(
                bilevel::plan(policy, starts[k % starts.size()], spec.base_seed + k).discounted_return);
        const bilevel::BiLevelStats stats = policy.stats();
        return Evaluated{stats.aggregate_wall_time(), mdp::summarize_returns(returns), stats.converged};
    };
    if (spec.warm_up)
        execute();
    return execute();
}

Evaluated run_learner(const ExperimentSpec& spec, const rover::FlatMdp& flat,
                      const std::vector<RoverState>& starts, SolverKind kind, std::size_t cap) {
    rl::LearnConfig cfg = spec.learning;
    cfg.episodes = cap;
    cfg.seed = derive_seed(spec.base_seed, cap);
    if (starts.size() == 1)
        cfg.start_state = *flat.index.index_of(starts.front());
    cfg.eval_state = *flat.index.index_of(starts.front());
    cfg.eval_interval = std::max<std::size_t>(1, cap / 10);
    cfg.eval_rollouts = 1;
    auto learn = [&] {
        return kind == SolverKind::qlearning ? rl::q_learning(flat.mdp, cfg) : rl::sarsa(flat.mdp, cfg);
    };
    if (spec.warm_up)
        learn();
    const rl::LearnResult result = learn();
    return {result.wall_time, evaluate_flat(flat, result.policy, starts, spec.n_sims, spec.base_seed),
            result.policy_stable};
}

} // namespace

std::string_view solver_tag(SolverKind kind) {
    return kSolverTags[static_cast<std::size_t>(kind)];
}

SolverKind parse_solver(std::string_view tag) {
    for (std::size_t k = 0; k < kSolverTags.size(); ++k) {
        if (kSolverTags[k] == tag)
            return static_cast<SolverKind>(k);
    }
    throw ConfigError("unknown solver '" + std::string(tag) + "' (expected vi, bl_vi, qlearning or sarsa)");
}

std::vector<RoverState> all_start_states(const rover::RoverGridWorld& env) {
    std::vector<RoverState> out;
    for (int x = 1; x <= env.width(); ++x) {
        for (int y = 1; y <= env.height(); ++y) {
            if (!env.is_goal_cell({x, y}))
                out.push_back(env.fresh_state({x, y}));
        }
    }
    return out;
}

std::vector<RoverState> resolve_starts(const rover::RoverGridWorld& env, const StartSelection& sel,
                                       std::uint64_t seed) {
    switch (sel.kind) {
    case StartSelection::Kind::all:
        return all_start_states(env);
    case StartSelection::Kind::random_sample: {
        std::vector<RoverState> pool = all_start_states(env);
        if (sel.sample_count == 0 || sel.sample_count > pool.size())
            throw ConfigError("random start sample must hold between 1 and " +
                              std::to_string(pool.size()) + " states");
        Rng rng(seed);
        for (std::size_t k = 0; k < sel.sample_count; ++k)
            std::swap(pool[k], pool[k + rng.below(pool.size() - k)]);
        pool.resize(sel.sample_count);
        return pool;
    }
    case StartSelection::Kind::listed:
        break;
    }
    for (const RoverState& s : sel.states) {
        if (!env.indexer().index_of(s))
            throw ConfigError("start state (" + std::to_string(s.x) + "," + std::to_string(s.y) + "," +
                              std::to_string(s.t) + ") is not a valid rover state");
    }
    if (sel.states.empty())
        throw ConfigError("the start-state list is empty");
    return sel.states;
}

void ExperimentSpec::validate() const {
    problem.validate();
    if (solvers.empty())
        throw ConfigError("the experiment needs at least one solver");
    if (n_sims < 1)
        throw ConfigError("n_sims must be at least 1");
    if (!(tolerance > 0.0))
        throw ConfigError("tolerance must be positive");
    for (std::size_t cap : max_iter_grid) {
        if (cap < 1)
            throw ConfigError("iteration caps must be at least 1");
    }
    for (std::size_t cap : episode_grid) {
        if (cap < 1)
            throw ConfigError("episode caps must be at least 1");
    }
    heuristic.validate();
}

std::vector<ResultRow> run_tradeoff(const ExperimentSpec& spec) {
    spec.validate();
    const rover::RoverGridWorld env(spec.problem);
    const std::vector<RoverState> starts = resolve_starts(env, spec.start, derive_seed(spec.base_seed, 0));

    std::optional<rover::FlatMdp> flat;
    std::vector<ResultRow> rows;
    for (SolverKind kind : spec.solvers) {
        const bool learner = kind == SolverKind::qlearning || kind == SolverKind::sarsa;
        if (kind != SolverKind::bl_vi && !flat)
            flat = rover::enumerate(env);
        for (std::size_t cap : learner ? spec.episode_grid : spec.max_iter_grid) {
            ResultRow row;
            row.solver = std::string(solver_tag(kind));
            row.iter_cap = cap;
            row.seed = spec.base_seed;
            try {
                Evaluated e;
                switch (kind) {
                case SolverKind::vi: e = run_vi(spec, *flat, starts, cap); break;
                case SolverKind::bl_vi: e = run_bilevel(spec, starts, cap); break;
                default: e = run_learner(spec, *flat, starts, kind, cap); break;
                }
                row.wall_time_s = spec.timing ? e.wall_time : 0.0;
                row.mean_return = e.stats.mean;
                row.std_error = e.stats.std_error;
                row.converged = e.converged;
            } catch (const std::exception& ex) {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row.wall_time_s = row.mean_return = row.std_error = nan;
                row.error = ex.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace roverplan::bench
