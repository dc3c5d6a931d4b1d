#pragma once

#include "roverplan/mdp/tabular_mdp.hpp"
#include "roverplan/rover/grid_config.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace roverplan::rover {

using mdp::ActionIndex;
using mdp::StateIndex;

/// Fixed enumeration order; the underlying value is the ActionIndex.
enum class RoverAction : ActionIndex { up = 0, down = 1, left = 2, right = 3, measure = 4, drill = 5 };

inline constexpr std::array<std::string_view, 6> kActionNames{"UP",      "DOWN",   "LEFT",
                                                              "RIGHT",   "MEASURE", "DRILL"};

inline std::string_view action_name(ActionIndex a) {
    return a < kActionNames.size() ? kActionNames[a] : std::string_view{"?"};
}

/// Position, time and tracking flags. Flag bitmasks are indexed by TargetId;
/// hibernation targets never carry flags.
struct RoverState {
    int x = 1;
    int y = 1;
    int t = 0;
    std::uint32_t measured = 0;
    std::uint32_t drilled = 0;
    std::uint32_t visited = 0;

    Cell cell() const { return {x, y}; }
    friend bool operator==(const RoverState&, const RoverState&) = default;
};

/// Tracking flags of one enumerated tracking combination.
struct Tracking {
    std::uint32_t measured = 0;
    std::uint32_t drilled = 0;
    std::uint32_t visited = 0;
};

/// Bijection between RoverState and dense StateIndex.
///
/// States are ordered lexicographically by (x, y, t, measured, drilled), or
/// (x, y, t, visited) in simplified mode. Only flag combinations with
/// drilled a subset of measured are enumerated; the others are unreachable.
/// One extra index past the enumerated states is the absorbing end-of-episode
/// sink.
class StateIndexer {
public:
    StateIndexer() = default;
    StateIndexer(int width, int height, int horizon, bool simplified,
                 std::vector<TargetId> tracked_targets);

    std::size_t tracking_count() const { return combos_.size(); }
    /// Enumerated states, excluding the sink.
    std::size_t rover_state_count() const { return rover_states_; }
    /// Enumerated states plus the sink.
    std::size_t state_count() const { return rover_states_ + 1; }
    StateIndex sink() const { return static_cast<StateIndex>(rover_states_); }

    const Tracking& tracking(std::size_t k) const { return combos_[k]; }
    const std::vector<TargetId>& tracked_targets() const { return tracked_; }

    std::optional<StateIndex> index_of(const RoverState& s) const;
    /// index_of without range checks; `s` must be a valid enumerated state.
    StateIndex index_unchecked(const RoverState& s) const;
    /// nullopt for the sink or an out-of-range index.
    std::optional<RoverState> state_of(StateIndex i) const;

private:
    std::optional<std::size_t> tracking_index(const RoverState& s) const;
    std::uint32_t compress(std::uint32_t mask) const;

    int width_ = 0;
    int height_ = 0;
    int horizon_ = 0;
    bool simplified_ = false;
    std::vector<TargetId> tracked_;
    std::uint32_t tracked_mask_ = 0;
    std::vector<Tracking> combos_;
    std::vector<std::int32_t> lookup_;
    std::size_t rover_states_ = 0;
};

/// Successor of a transition: a rover state, or the end-of-episode sink.
struct Successor {
    RoverState state;
    bool ends_episode = false;
};

struct StepOutcome {
    Successor next;
    double probability = 0.0;
};

/// Distribution over successors; at most three outcomes (activity durations).
struct StepDistribution {
    std::array<StepOutcome, 3> outcomes{};
    std::size_t count = 0;

    const StepOutcome* begin() const { return outcomes.data(); }
    const StepOutcome* end() const { return outcomes.data() + count; }
    std::size_t size() const { return count; }
    const StepOutcome& operator[](std::size_t k) const { return outcomes[k]; }
};

/// Reward split into target payouts and obstacle/other penalties;
/// total == r_tgts + r_obst.
struct RewardParts {
    double total = 0.0;
    double r_tgts = 0.0;
    double r_obst = 0.0;
};

/// Compiled, immutable RoverGridWorld environment.
class RoverGridWorld {
public:
    explicit RoverGridWorld(GridConfig cfg);

    const GridConfig& config() const { return cfg_; }
    const StateIndexer& indexer() const { return indexer_; }
    std::size_t action_count() const { return cfg_.simplified ? 4 : 6; }
    int width() const { return cfg_.width; }
    int height() const { return cfg_.height; }
    int horizon() const { return cfg_.horizon; }
    double discount() const { return cfg_.discount; }

    const Target& target(TargetId id) const { return cfg_.targets[id]; }
    /// Mask of all non-hibernation targets (the ones with tracking flags).
    std::uint32_t science_mask() const { return science_mask_; }
    std::optional<TargetId> target_at(Cell c) const;
    bool is_goal_cell(Cell c) const;
    /// Goal-cell states end the episode; the sink is handled by the indexer.
    bool is_terminal(const RoverState& s) const { return is_goal_cell(s.cell()); }
    bool in_bounds(Cell c) const;

    bool is_obstacle(Cell c) const;
    bool is_shadowed(Cell c, int t) const;
    /// Static obstacle penalty plus shadow penalty at time t.
    double obstacle_cost(Cell c, int t) const;
    /// Science targets whose cell is within the 8-neighborhood of c, or c itself.
    std::uint32_t measurable_from(Cell c) const;

    /// Whether target `id` counts as done for the given flags.
    bool target_done(const RoverState& s, TargetId id) const;

    /// Transition distribution. Requires a non-terminal, in-range state.
    StepDistribution step(const RoverState& s, RoverAction a) const;
    RewardParts reward(const RoverState& s, RoverAction a, const Successor& next) const;

    /// Fresh start at a cell: time 0 and no flags.
    RoverState fresh_state(Cell c, int t = 0) const { return {c.x, c.y, t, 0, 0, 0}; }

private:
    std::size_t cell_index(Cell c) const {
        return static_cast<std::size_t>(c.x - 1) * cfg_.height + (c.y - 1);
    }

    GridConfig cfg_;
    StateIndexer indexer_;
    std::uint32_t science_mask_ = 0;
    std::vector<std::int32_t> target_by_cell_;
    std::vector<std::uint8_t> goal_cell_;
    std::vector<std::uint32_t> measurable_;
    std::vector<double> static_penalty_;
    std::vector<std::uint8_t> shadowed_;
    std::vector<double> cost_;
};

} // namespace roverplan::rover
