#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace roverplan::rover {

using TargetId = std::uint32_t;

/// Grid cell, 1-based. UP increases y, RIGHT increases x.
struct Cell {
    int x = 1;
    int y = 1;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Inclusive range of timesteps during which a target pays out.
struct TimeWindow {
    int open = 0;
    int close = 0;
    bool contains(int t) const { return open <= t && t <= close; }
};

// Declared reward defaults. The magnitudes are choices of this project, not
// measured mission values.
inline constexpr double kDefaultMeasureReward = 5.0;
inline constexpr double kDefaultDrillReward = 50.0;
inline constexpr double kDefaultHibernationReward = 10.0;
inline constexpr double kDefaultObstaclePenalty = -10.0;
inline constexpr double kDefaultShadowPenalty = -5.0;
inline constexpr double kDefaultEndPenalty = -5.0;

struct Target {
    TargetId id = 0;
    Cell cell;
    double measure_reward = kDefaultMeasureReward;
    double drill_reward = kDefaultDrillReward;
    TimeWindow window;
    /// Hibernation areas are episode goals: arriving there ends the episode.
    bool is_hibernation = false;

    /// Payout for simply reaching the target (simplified mode, hibernation arrival).
    double visit_reward() const { return measure_reward + drill_reward; }
};

/// A band of shadowed columns moving across the grid. At time t the band
/// covers columns [floor(start_column + velocity * t), ... + width).
struct ShadowSweep {
    double start_column = 1.0;
    double velocity = 0.5;
    int width = 1;
};

struct ShadowOverride {
    int t = 0;
    std::vector<Cell> cells;
};

/// Time-varying shadows plus static obstacles; both carry non-positive penalties.
struct ShadowSchedule {
    double shadow_penalty = kDefaultShadowPenalty;
    std::optional<ShadowSweep> sweep;
    std::vector<ShadowOverride> overrides;
    double obstacle_penalty = kDefaultObstaclePenalty;
    std::vector<Cell> obstacles;
};

struct GridConfig {
    int width = 10;
    int height = 10;
    int horizon = 20;
    double discount = 0.95;
    std::vector<Target> targets;
    ShadowSchedule shadows;
    /// Probability weights for activity durations of 1, 2 and 3 timesteps.
    std::array<double, 3> activity_durations{1.0, 0.0, 0.0};
    /// Visit-only variant: four move actions, `visited` tracking instead of
    /// measured/drilled.
    bool simplified = false;
    /// Charged on the end-of-horizon transition when not at a hibernation area.
    double end_penalty = kDefaultEndPenalty;

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;

    bool deterministic_durations() const;
};

} // namespace roverplan::rover
