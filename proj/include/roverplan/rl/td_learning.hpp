#pragma once

#include "roverplan/mdp/tabular_mdp.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace roverplan::rl {

using mdp::ActionIndex;
using mdp::StateIndex;

/// Dense state x action table of action values.
struct QTable {
    std::size_t states = 0;
    std::size_t actions = 0;
    std::vector<double> q;

    double& at(StateIndex s, ActionIndex a) { return q[static_cast<std::size_t>(s) * actions + a]; }
    double at(StateIndex s, ActionIndex a) const {
        return q[static_cast<std::size_t>(s) * actions + a];
    }
};

struct LearnConfig {
    std::size_t episodes = 50'000;
    std::size_t step_cap = 10'000;
    double learning_rate = 0.1;
    double epsilon = 0.2;
    /// Multiplicative epsilon decay applied after every episode.
    double epsilon_decay = 0.999;
    double initial_q = 0.0;
    std::uint64_t seed = 0;
    /// Episode start; uniformly random non-terminal states when empty.
    std::optional<StateIndex> start_state;
    /// Episodes between learning-curve samples; 0 disables the curve.
    std::size_t eval_interval = 0;
    std::size_t eval_rollouts = 20;
    /// Start state of the curve evaluations; defaults to start_state, then 0.
    std::optional<StateIndex> eval_state;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

struct CurvePoint {
    std::size_t episode;
    /// Training time so far, excluding curve evaluations.
    double wall_time;
    double mean_return;
};

struct LearnResult {
    QTable table;
    mdp::Policy policy;
    std::vector<CurvePoint> learning_curve;
    double wall_time = 0.0;
    /// Greedy policy unchanged since the previous curve sample.
    bool policy_stable = false;
};

/// Greedy policy of a Q table over legal actions, lowest index on ties.
mdp::Policy greedy_policy(const mdp::TabularMdp& mdp, const QTable& table);

/// Off-policy TD control: target r + discount * max_a' Q(s', a').
LearnResult q_learning(const mdp::TabularMdp& mdp, const LearnConfig& cfg);

/// On-policy TD control: target r + discount * Q(s', a') with a' drawn from
/// the epsilon-greedy behavior policy.
LearnResult sarsa(const mdp::TabularMdp& mdp, const LearnConfig& cfg);

} // namespace roverplan::rl
