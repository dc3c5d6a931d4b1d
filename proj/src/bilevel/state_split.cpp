#include "roverplan/bilevel/state_split.hpp"

#include "roverplan/errors.hpp"

#include <string>

namespace roverplan::bilevel {

Telemetry telemetry_of(const RoverState& s) {
    return {s.x, s.y, s.t};
}

TrackingFlags tracking_of(const RoverState& s) {
    return {s.measured, s.drilled, s.visited};
}

RoverState merge(const Telemetry& telemetry, const TrackingFlags& tracking) {
    return {telemetry.x, telemetry.y, telemetry.t, tracking.measured, tracking.drilled,
            tracking.visited};
}

LowLevelState subset_of(const RoverState& s, TargetId focal) {
    return {telemetry_of(s), (s.measured & (1u << focal)) != 0};
}

RoverState update_hl_state(const RoverState& base, const LowLevelState& final_state,
                           TargetId focal, const FlagEvents& events) {
    TrackingFlags tracking = tracking_of(base);
    tracking.measured |= events.measured;
    tracking.drilled |= events.drilled;
    tracking.visited |= events.visited;
    if (final_state.measured_current)
        tracking.measured |= 1u << focal;
    return merge(final_state.telemetry, tracking);
}

MissionSpec MissionSpec::all_targets(const rover::GridConfig& cfg) {
    MissionSpec spec;
    for (const auto& t : cfg.targets)
        spec.targets.push_back(t.id);
    return spec;
}

void MissionSpec::validate(const rover::GridConfig& cfg) const {
    if (targets.empty())
        throw ConfigError("the mission needs at least one target");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] >= cfg.targets.size())
            throw ConfigError("mission target " + std::to_string(targets[i]) + " is not configured");
        for (std::size_t j = 0; j < i; ++j) {
            if (targets[j] == targets[i])
                throw ConfigError("mission target " + std::to_string(targets[i]) + " is listed twice");
        }
    }
}

} // namespace roverplan::bilevel
