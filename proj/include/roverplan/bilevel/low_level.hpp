#pragma once

#include "roverplan/bilevel/state_split.hpp"
#include "roverplan/mdp/tabular_mdp.hpp"

#include <optional>

namespace roverplan::bilevel {

/// Navigation MDP over telemetry for one focal target, or the wind-down MDP
/// used once no target is left to pursue.
///
/// Target problems: states (x, y, t) plus a measured_current bit in full mode,
/// and one absorbing "done" state. They end when the focal target is drilled
/// (full mode), its cell is reached while its window is open (simplified
/// mode), a goal cell is reached, or t = horizon. Rewards are the obstacle and
/// shadow penalties plus the focal target's own payouts.
///
/// Wind-down problem: states (x, y, t) plus the end-of-episode state. It ends
/// at goal cells or after the horizon step, which pays the end penalty; the
/// reward is the flat reward without science payouts.
class LowLevelMdp {
public:
    static LowLevelMdp for_target(const rover::RoverGridWorld& env, TargetId focal);
    static LowLevelMdp wind_down(const rover::RoverGridWorld& env);

    const mdp::TabularMdp& mdp() const { return mdp_; }
    std::optional<TargetId> focal() const { return focal_; }
    /// Telemetry states excluding the absorbing state.
    std::size_t telemetry_state_count() const { return mdp_.state_count() - 1; }
    StateIndex absorbing() const { return static_cast<StateIndex>(mdp_.state_count() - 1); }

    StateIndex index_of(const LowLevelState& s) const;
    /// Low-level index of a flat rover state.
    StateIndex project(const RoverState& s) const;
    /// nullopt for the absorbing state.
    std::optional<LowLevelState> state_of(StateIndex i) const;

private:
    LowLevelMdp(const rover::RoverGridWorld& env, std::optional<TargetId> focal);

    int width_ = 0;
    int height_ = 0;
    int horizon_ = 0;
    std::size_t bits_ = 1;
    std::optional<TargetId> focal_;
    mdp::TabularMdp mdp_;
};

} // namespace roverplan::bilevel
