#pragma once

#include "roverplan/bench/experiment.hpp"
#include "roverplan/bilevel/planner.hpp"
#include "roverplan/rover/enumerate.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace roverplan::bench {

struct ContingencyEntry {
    RoverState state;
    /// Flat-MDP trace of the plan; empty on error.
    mdp::Trace trace;
    double discounted_return = 0.0;
    /// Planning latency of this query, including any low-level solves it triggered.
    double latency_s = 0.0;
    std::size_t new_ll_solves = 0;
    std::string error;
};

struct ContingencyReport {
    double solve_time_s = 0.0;
    std::vector<ContingencyEntry> entries;
};

/// Solves a problem once and answers plan queries from arbitrary states.
class ContingencyPlanner {
public:
    ContingencyPlanner(const rover::GridConfig& cfg, SolverKind solver,
                       const bilevel::SolverSettings& settings = {},
                       const bilevel::HeuristicSpec& heuristic = {});

    /// One-time solve cost (flat VI, or the high-level solve for bl_vi).
    double solve_time() const { return solve_time_; }
    const rover::RoverGridWorld& env() const;
    /// Low-level solves performed so far (bl_vi only).
    std::size_t ll_solves() const;

    /// Plans from `s`; an invalid or terminal state yields an error entry.
    ContingencyEntry query(const RoverState& s, std::uint64_t seed);

private:
    SolverKind solver_;
    double solve_time_ = 0.0;
    std::unique_ptr<rover::RoverGridWorld> env_;
    std::optional<rover::FlatMdp> flat_;
    mdp::Policy flat_policy_;
    std::optional<bilevel::BiLevelPolicy> bilevel_;
};

/// Solves once and plans from every listed state, seeding query k with seed + k.
ContingencyReport run_contingency(const rover::GridConfig& cfg, const std::vector<RoverState>& states,
                                  SolverKind solver, std::uint64_t seed,
                                  const bilevel::SolverSettings& settings = {},
                                  const bilevel::HeuristicSpec& heuristic = {});

/// Uniformly random valid, non-terminal rover states (any time and flags).
std::vector<RoverState> random_off_nominal_states(const rover::RoverGridWorld& env, std::size_t count,
                                                  std::uint64_t seed);

} // namespace roverplan::bench
