#pragma once

#include "roverplan/bilevel/heuristic.hpp"
#include "roverplan/rl/td_learning.hpp"
#include "roverplan/rover/grid_world.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace roverplan::bench {

using mdp::StateIndex;
using rover::RoverState;

enum class SolverKind { vi, bl_vi, qlearning, sarsa };

std::string_view solver_tag(SolverKind kind);
/// Throws ConfigError for an unknown tag.
SolverKind parse_solver(std::string_view tag);

/// Where evaluation rollouts start. Rollout k starts from states[k % size].
struct StartSelection {
    enum class Kind { listed, all, random_sample };
    Kind kind = Kind::listed;
    std::vector<RoverState> states{RoverState{}};
    /// Number of states drawn for random_sample.
    std::size_t sample_count = 0;
};

/// Every non-goal cell at t = 0 with no flags set, in cell order.
std::vector<RoverState> all_start_states(const rover::RoverGridWorld& env);

/// Resolves a selection to concrete states; random samples draw distinct
/// non-goal cells at t = 0 with a generator seeded from `seed`.
std::vector<RoverState> resolve_starts(const rover::RoverGridWorld& env, const StartSelection& sel,
                                       std::uint64_t seed);

struct ExperimentSpec {
    rover::GridConfig problem;
    std::vector<SolverKind> solvers{SolverKind::vi, SolverKind::bl_vi};
    /// Value-iteration sweep caps for vi and bl_vi.
    std::vector<std::size_t> max_iter_grid{1000};
    /// Training-episode caps for qlearning and sarsa.
    std::vector<std::size_t> episode_grid{50'000};
    std::size_t n_sims = 500;
    std::uint64_t base_seed = 0;
    StartSelection start;
    double tolerance = 1e-6;
    bilevel::HeuristicSpec heuristic;
    /// Hyperparameters for the learners; episodes and seed are set per row.
    rl::LearnConfig learning;
    /// Run each solve once untimed before the timed run.
    bool warm_up = true;
    /// When false every wall time is reported as 0 so output is byte-stable.
    bool timing = true;

    void validate() const;
};

/// One (solver, cap) cell of a trade-off experiment.
struct ResultRow {
    std::string solver;
    std::size_t iter_cap = 0;
    double wall_time_s = 0.0;
    double mean_return = 0.0;
    double std_error = 0.0;
    bool converged = false;
    std::uint64_t seed = 0;
    /// Non-empty when the solver failed; the numeric fields are then NaN.
    std::string error;
};

/// Runs every solver x cap in spec order. Failures are recorded per row.
std::vector<ResultRow> run_tradeoff(const ExperimentSpec& spec);

} // namespace roverplan::bench
