#include "roverplan/bilevel/heuristic.hpp"

#include "roverplan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace roverplan::bilevel {

using rover::Cell;
using rover::RoverAction;

void HeuristicSpec::validate() const {
    if (!(speed_slack >= 1.0) || !std::isfinite(speed_slack))
        throw ConfigError("heuristic speed_slack must be finite and at least 1");
    if (activity_time_estimate < 0)
        throw ConfigError("heuristic activity_time_estimate must be non-negative");
    if (!(obstacle_threshold >= 0.0))
        throw ConfigError("heuristic obstacle_threshold must be non-negative");
}

CoarseHeuristic::CoarseHeuristic(const rover::RoverGridWorld& env, const MissionSpec& mission,
                                 const HeuristicSpec& spec)
    : env_(env), spec_(spec), targets_(mission.targets) {
    spec_.validate();
    const int w = env.width();
    const int h = env.height();
    const int horizon = env.horizon();
    const std::size_t cells = static_cast<std::size_t>(w) * h;
    auto cell_index = [&](Cell c) { return static_cast<std::size_t>(c.x - 1) * h + (c.y - 1); };
    auto slot = [&](Cell c, int t) { return static_cast<std::size_t>(t) * cells + cell_index(c); };
    auto counted = [&](Cell c, int t) {
        const double cost = env.obstacle_cost(c, t);
        return std::abs(cost) >= spec_.obstacle_threshold ? cost : 0.0;
    };

    slot_of_.assign(env.config().targets.size(), 0);
    for (std::size_t k = 0; k < targets_.size(); ++k) {
        slot_of_[targets_[k]] = k;
        const Cell goal = env.config().targets[targets_[k]].cell;
        // Penalty along the x-first and the y-first route from (cell, t) when
        // moving one cell per timestep; filled backwards in time.
        std::vector<double> x_first((horizon + 1) * cells, 0.0);
        std::vector<double> y_first((horizon + 1) * cells, 0.0);
        for (int t = horizon - 1; t >= 0; --t) {
            for (int x = 1; x <= w; ++x) {
                for (int y = 1; y <= h; ++y) {
                    const Cell c{x, y};
                    if (c == goal)
                        continue;
                    const int dx = (goal.x > x) - (goal.x < x);
                    const int dy = (goal.y > y) - (goal.y < y);
                    const Cell via_x = dx != 0 ? Cell{x + dx, y} : Cell{x, y + dy};
                    const Cell via_y = dy != 0 ? Cell{x, y + dy} : Cell{x + dx, y};
                    x_first[slot(c, t)] = counted(via_x, t + 1) + x_first[slot(via_x, t + 1)];
                    y_first[slot(c, t)] = counted(via_y, t + 1) + y_first[slot(via_y, t + 1)];
                }
            }
        }
        for (std::size_t i = 0; i < x_first.size(); ++i)
            x_first[i] = std::max(x_first[i], y_first[i]);
        route_.push_back(std::move(x_first));
    }
}

double CoarseHeuristic::route_penalty(std::size_t slot, const RoverState& s) const {
    const std::size_t cells = static_cast<std::size_t>(env_.width()) * env_.height();
    const std::size_t c = static_cast<std::size_t>(s.x - 1) * env_.height() + (s.y - 1);
    return route_[slot][static_cast<std::size_t>(s.t) * cells + c];
}

HeuristicOutcome CoarseHeuristic::transition(const RoverState& s, TargetId target) const {
    const auto& cfg = env_.config();
    if (target >= cfg.targets.size() || targets_[slot_of_[target]] != target)
        throw ContractViolation("target " + std::to_string(target) + " is not part of the mission");
    const auto& tgt = cfg.targets[target];
    HeuristicOutcome out;
    out.next = s;
    if (!tgt.is_hibernation && env_.target_done(s, target))
        return out;
    // A visit only counts when the rover enters the cell, so standing on an
    // unvisited target leaves nothing for its low-level problem to do.
    if (cfg.simplified && s.cell() == tgt.cell)
        return out;

    const int distance = std::abs(tgt.cell.x - s.x) + std::abs(tgt.cell.y - s.y);
    const int travel = static_cast<int>(std::ceil(distance * spec_.speed_slack - 1e-9));
    const int activity = !tgt.is_hibernation && !cfg.simplified ? spec_.activity_time_estimate : 0;
    const int duration = travel + activity;
    const int arrival = std::max(s.t + duration, tgt.window.open);
    const int latest = tgt.is_hibernation ? env_.horizon() : std::min(env_.horizon(), tgt.window.close);
    if (arrival > latest)
        return out;

    out.feasible = true;
    out.duration = duration;
    out.next.x = tgt.cell.x;
    out.next.y = tgt.cell.y;
    out.next.t = arrival;
    const std::uint32_t bit = 1u << target;
    double payout = 0.0;
    if (tgt.is_hibernation) {
        payout = tgt.window.contains(arrival) ? tgt.visit_reward() : 0.0;
    } else if (cfg.simplified) {
        out.next.visited |= bit;
        payout = tgt.visit_reward();
    } else {
        payout = ((s.measured & bit) ? 0.0 : tgt.measure_reward) + tgt.drill_reward;
        out.next.measured |= bit;
        out.next.drilled |= bit;
    }
    out.estimated_reward = payout + route_penalty(slot_of_[target], s);
    return out;
}

HeuristicOutcome exact_transition(const rover::RoverGridWorld& env, const LowLevelMdp& ll,
                                  const mdp::Policy& ll_policy, const RoverState& s) {
    if (!env.config().deterministic_durations())
        throw ContractViolation("the exact heuristic needs deterministic activity durations");
    HeuristicOutcome out;
    out.next = s;
    StateIndex li = ll.project(s);
    if (ll.mdp().is_terminal(li))
        return out;
    double factor = 1.0;
    RoverState cur = s;
    while (!ll.mdp().is_terminal(li)) {
        const auto action = static_cast<RoverAction>(ll_policy.actions[li]);
        const auto dist = env.step(cur, action);
        const auto& o = dist[0];
        out.estimated_reward += factor * env.reward(cur, action, o.next).total;
        factor *= env.discount();
        if (o.next.ends_episode)
            break;
        cur = o.next.state;
        li = ll.project(cur);
    }
    out.feasible = true;
    out.next = cur;
    out.duration = cur.t - s.t;
    return out;
}

} // namespace roverplan::bilevel
