#pragma once

#include "roverplan/bilevel/low_level.hpp"
#include "roverplan/bilevel/state_split.hpp"
#include "roverplan/mdp/tabular_mdp.hpp"

#include <vector>

namespace roverplan::bilevel {

enum class HeuristicMode { coarse, exact };

inline constexpr double kDefaultSpeedSlack = 1.2;
inline constexpr int kDefaultActivityEstimate = 2;
inline constexpr double kDefaultObstacleThreshold = 6.0;

struct HeuristicSpec {
    HeuristicMode mode = HeuristicMode::coarse;
    /// Multiplier on the Manhattan distance; travel takes
    /// ceil(distance * speed_slack) timesteps.
    double speed_slack = kDefaultSpeedSlack;
    /// Timesteps budgeted for measuring and drilling at a science target
    /// (full mode only).
    int activity_time_estimate = kDefaultActivityEstimate;
    /// Route penalties with magnitude below this are ignored.
    double obstacle_threshold = kDefaultObstacleThreshold;

    void validate() const;
};

/// Point-mass estimate of pursuing one target from a state.
struct HeuristicOutcome {
    RoverState next;
    int duration = 0;
    double estimated_reward = 0.0;
    /// False when the target is done, cannot be reached in its window, or (in
    /// simplified mode) the rover already stands on it without having entered
    /// it; `next` is then the input state and the reward 0.
    bool feasible = false;
};

/// Conservative travel-time model: straight-line Manhattan travel with slack,
/// waiting for the window to open, payout of the target plus the large
/// penalties along the better of the two L-shaped routes.
class CoarseHeuristic {
public:
    CoarseHeuristic(const rover::RoverGridWorld& env, const MissionSpec& mission,
                    const HeuristicSpec& spec);

    HeuristicOutcome transition(const RoverState& s, TargetId target) const;

private:
    double route_penalty(std::size_t slot, const RoverState& s) const;

    const rover::RoverGridWorld& env_;
    HeuristicSpec spec_;
    std::vector<TargetId> targets_;
    std::vector<std::size_t> slot_of_;
    std::vector<std::vector<double>> route_;
};

/// Exact transition for deterministic instances: roll the focal target's
/// solved low-level policy forward in the flat environment. The successor is
/// the state where the low-level run ends; the reward is the discounted flat
/// reward collected on the way.
HeuristicOutcome exact_transition(const rover::RoverGridWorld& env, const LowLevelMdp& ll,
                                  const mdp::Policy& ll_policy, const RoverState& s);

} // namespace roverplan::bilevel
