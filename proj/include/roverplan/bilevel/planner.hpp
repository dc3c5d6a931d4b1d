#pragma once

#include "roverplan/bilevel/heuristic.hpp"
#include "roverplan/bilevel/low_level.hpp"
#include "roverplan/bilevel/state_split.hpp"
#include "roverplan/mdp/tabular_mdp.hpp"
#include "roverplan/mdp/value_iteration.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace roverplan::bilevel {

struct SolverSettings {
    double tolerance = mdp::kDefaultTolerance;
    std::size_t max_iterations = mdp::kDefaultMaxIterations;
    unsigned threads = 1;
};

/// A solved low-level problem.
struct LowLevelSolution {
    LowLevelMdp problem;
    mdp::SolveReport report;
};

/// Solver effort spent so far. Construction of the MDPs is not timed.
struct BiLevelStats {
    double hl_wall_time = 0.0;
    double ll_wall_time = 0.0;
    double wind_down_wall_time = 0.0;
    /// Target low-level problems solved (cache misses).
    std::size_t ll_solves = 0;
    std::size_t wind_down_solves = 0;
    std::uint64_t hl_backups_per_sweep = 0;
    /// Largest per-sweep backup count among the solved low-level problems.
    std::uint64_t ll_backups_per_sweep = 0;
    bool converged = true;

    double aggregate_wall_time() const { return hl_wall_time + ll_wall_time + wind_down_wall_time; }
};

struct HlDecision {
    StateIndex hl_state;
    TargetId target;
};

struct PlanResult {
    double discounted_return = 0.0;
    std::vector<HlDecision> hl_decisions;
    /// Flat-MDP states, actions and rewards of the executed steps.
    mdp::Trace trace;
    /// Rover state after the last step; nullopt when the episode ended in the sink.
    std::optional<RoverState> final_state;
};

/// High-level policy plus the lazily filled low-level cache.
class BiLevelPolicy {
public:
    /// Builds and solves the high-level MDP.
    BiLevelPolicy(rover::GridConfig cfg, MissionSpec mission, HeuristicSpec heuristic,
                  SolverSettings settings);

    const rover::RoverGridWorld& env() const { return *env_; }
    const MissionSpec& mission() const { return mission_; }
    const HeuristicSpec& heuristic() const { return heuristic_; }
    const mdp::TabularMdp& hl_mdp() const { return hl_mdp_; }
    const mdp::SolveReport& hl_report() const { return hl_report_; }
    const mdp::Policy& hl_policy() const { return hl_report_.policy; }
    BiLevelStats stats() const;

    /// Solved low-level problem for a target, solving it on first use.
    /// Safe to call concurrently; the first finished solve is kept.
    const LowLevelSolution& low_level(TargetId target);
    const LowLevelSolution& wind_down();
    bool is_cached(TargetId target) const;

private:
    void solve_high_level();
    const LowLevelSolution& solve_cached(std::optional<TargetId> target);

    struct Cache {
        mutable std::mutex mutex;
        std::map<TargetId, std::unique_ptr<LowLevelSolution>> targets;
        std::unique_ptr<LowLevelSolution> wind_down;
        BiLevelStats stats;
    };

    std::unique_ptr<rover::RoverGridWorld> env_;
    MissionSpec mission_;
    HeuristicSpec heuristic_;
    SolverSettings settings_;
    mdp::TabularMdp hl_mdp_;
    mdp::SolveReport hl_report_;
    std::unique_ptr<Cache> cache_;
};

/// Builds and solves the high-level MDP; low-level problems are solved when
/// planning first needs them. Exact mode on an instance with stochastic
/// durations falls back to the coarse heuristic with a warning on stderr.
BiLevelPolicy solve_bilevel(const rover::GridConfig& cfg, const MissionSpec& mission,
                            const HeuristicSpec& heuristic = {}, const SolverSettings& settings = {});

/// Executes the two-level policy from `s0` in the flat environment, sampling
/// activity durations from a generator seeded by `seed`. Each step's reward is
/// the flat reward, and the return discounts step k by discount^k exactly as
/// a flat-MDP rollout does.
PlanResult plan(BiLevelPolicy& policy, const RoverState& s0, std::uint64_t seed);

} // namespace roverplan::bilevel
