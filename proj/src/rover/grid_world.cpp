#include "roverplan/rover/grid_world.hpp"

#include "roverplan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace roverplan::rover {

namespace {

/// Science targets are tracked with one bit each; 3^n tracking combinations
/// and the 4^n lookup table must stay enumerable.
constexpr std::size_t kMaxTrackedTargets = 10;
/// Target ids index 32-bit flag masks.
constexpr std::size_t kMaxTargets = 32;

std::string cell_text(Cell c) {
    return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

void require_in_grid(const GridConfig& cfg, Cell c, const std::string& what) {
    if (c.x < 1 || c.x > cfg.width || c.y < 1 || c.y > cfg.height)
        throw ConfigError(what + " cell " + cell_text(c) + " lies outside the " +
                          std::to_string(cfg.width) + "x" + std::to_string(cfg.height) + " grid");
}

} // namespace

void GridConfig::validate() const {
    if (width < 1 || height < 1)
        throw ConfigError("grid width and height must be at least 1");
    if (horizon < 1)
        throw ConfigError("horizon must be at least 1");
    if (!(discount > 0.0 && discount <= 1.0))
        throw ConfigError("discount must lie in (0, 1]");
    if (!std::isfinite(end_penalty) || end_penalty > 0.0)
        throw ConfigError("end_penalty must be finite and non-positive");

    double weight_sum = 0.0;
    for (double w : activity_durations) {
        if (!std::isfinite(w) || w < 0.0)
            throw ConfigError("activity duration weights must be finite and non-negative");
        weight_sum += w;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9)
        throw ConfigError("activity duration weights must sum to 1");

    if (targets.size() > kMaxTargets)
        throw ConfigError("at most " + std::to_string(kMaxTargets) + " targets are supported");
    std::size_t science = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const Target& tgt = targets[i];
        const std::string name = "target " + std::to_string(i);
        if (tgt.id != i)
            throw ConfigError(name + " has id " + std::to_string(tgt.id) +
                              "; ids must be dense and in order");
        require_in_grid(*this, tgt.cell, name);
        if (tgt.window.open < 0 || tgt.window.open > tgt.window.close || tgt.window.close > horizon)
            throw ConfigError(name + " window must satisfy 0 <= open <= close <= horizon");
        if (!std::isfinite(tgt.measure_reward) || !std::isfinite(tgt.drill_reward))
            throw ConfigError(name + " rewards must be finite");
        for (std::size_t j = 0; j < i; ++j) {
            if (targets[j].cell == tgt.cell)
                throw ConfigError(name + " shares cell " + cell_text(tgt.cell) + " with target " +
                                  std::to_string(j));
        }
        science += tgt.is_hibernation ? 0 : 1;
    }
    if (science > kMaxTrackedTargets)
        throw ConfigError("at most " + std::to_string(kMaxTrackedTargets) +
                          " non-hibernation targets are supported");

    if (!std::isfinite(shadows.shadow_penalty) || shadows.shadow_penalty > 0.0)
        throw ConfigError("shadow penalty must be finite and non-positive");
    if (!std::isfinite(shadows.obstacle_penalty) || shadows.obstacle_penalty > 0.0)
        throw ConfigError("obstacle penalty must be finite and non-positive");
    for (Cell c : shadows.obstacles)
        require_in_grid(*this, c, "obstacle");
    if (shadows.sweep) {
        if (!std::isfinite(shadows.sweep->start_column) || !std::isfinite(shadows.sweep->velocity))
            throw ConfigError("shadow sweep start_column and velocity must be finite");
        if (shadows.sweep->width < 1)
            throw ConfigError("shadow sweep width must be at least 1");
    }
    for (const ShadowOverride& o : shadows.overrides) {
        if (o.t < 0 || o.t > horizon)
            throw ConfigError("shadow override time " + std::to_string(o.t) +
                              " lies outside [0, horizon]");
        for (Cell c : o.cells)
            require_in_grid(*this, c, "shadow override");
    }
}

bool GridConfig::deterministic_durations() const {
    return std::count_if(activity_durations.begin(), activity_durations.end(),
                         [](double w) { return w > 0.0; }) == 1;
}

StateIndexer::StateIndexer(int width, int height, int horizon, bool simplified,
                           std::vector<TargetId> tracked_targets)
    : width_(width), height_(height), horizon_(horizon), simplified_(simplified),
      tracked_(std::move(tracked_targets)) {
    for (TargetId id : tracked_)
        tracked_mask_ |= 1u << id;
    const std::size_t n = tracked_.size();
    auto expand = [&](std::uint32_t dense) {
        std::uint32_t mask = 0;
        for (std::size_t b = 0; b < n; ++b) {
            if (dense & (1u << b))
                mask |= 1u << tracked_[b];
        }
        return mask;
    };

    // Lookup key: dense visited bits (simplified) or dense measured bits
    // followed by dense drilled bits (full). Combos are sorted by their
    // expanded masks so indices follow lexicographic flag order.
    if (simplified_) {
        lookup_.assign(std::size_t{1} << n, -1);
        for (std::uint32_t v = 0; v < (1u << n); ++v)
            combos_.push_back({0, 0, expand(v)});
        std::sort(combos_.begin(), combos_.end(),
                  [](const Tracking& a, const Tracking& b) { return a.visited < b.visited; });
        for (std::size_t k = 0; k < combos_.size(); ++k)
            lookup_[compress(combos_[k].visited)] = static_cast<std::int32_t>(k);
    } else {
        lookup_.assign(std::size_t{1} << (2 * n), -1);
        for (std::uint32_t m = 0; m < (1u << n); ++m) {
            for (std::uint32_t d = m;; d = (d - 1) & m) {
                combos_.push_back({expand(m), expand(d), 0});
                if (d == 0)
                    break;
            }
        }
        std::sort(combos_.begin(), combos_.end(), [](const Tracking& a, const Tracking& b) {
            return a.measured != b.measured ? a.measured < b.measured : a.drilled < b.drilled;
        });
        for (std::size_t k = 0; k < combos_.size(); ++k) {
            const std::size_t key = (std::size_t{compress(combos_[k].measured)} << n) |
                                    compress(combos_[k].drilled);
            lookup_[key] = static_cast<std::int32_t>(k);
        }
    }

    const std::size_t count = static_cast<std::size_t>(width_) * height_ * (horizon_ + 1) *
                              combos_.size();
    if (count >= std::numeric_limits<StateIndex>::max())
        throw ResourceError("state space of " + std::to_string(count) +
                            " states exceeds the 32-bit state index range");
    rover_states_ = count;
}

std::uint32_t StateIndexer::compress(std::uint32_t mask) const {
    std::uint32_t dense = 0;
    for (std::size_t b = 0; b < tracked_.size(); ++b) {
        if (mask & (1u << tracked_[b]))
            dense |= 1u << b;
    }
    return dense;
}

std::optional<std::size_t> StateIndexer::tracking_index(const RoverState& s) const {
    std::int32_t k = -1;
    if (simplified_) {
        if (s.measured != 0 || s.drilled != 0 || (s.visited & ~tracked_mask_) != 0)
            return std::nullopt;
        k = lookup_[compress(s.visited)];
    } else {
        if (s.visited != 0 || ((s.measured | s.drilled) & ~tracked_mask_) != 0)
            return std::nullopt;
        const std::size_t key =
            (std::size_t{compress(s.measured)} << tracked_.size()) | compress(s.drilled);
        k = lookup_[key];
    }
    if (k < 0)
        return std::nullopt;
    return static_cast<std::size_t>(k);
}

std::optional<StateIndex> StateIndexer::index_of(const RoverState& s) const {
    if (s.x < 1 || s.x > width_ || s.y < 1 || s.y > height_ || s.t < 0 || s.t > horizon_)
        return std::nullopt;
    const auto k = tracking_index(s);
    if (!k)
        return std::nullopt;
    return index_unchecked(s);
}

StateIndex StateIndexer::index_unchecked(const RoverState& s) const {
    std::size_t k = 0;
    if (simplified_) {
        k = static_cast<std::size_t>(lookup_[compress(s.visited)]);
    } else {
        const std::size_t key =
            (std::size_t{compress(s.measured)} << tracked_.size()) | compress(s.drilled);
        k = static_cast<std::size_t>(lookup_[key]);
    }
    const std::size_t cell = static_cast<std::size_t>(s.x - 1) * height_ + (s.y - 1);
    return static_cast<StateIndex>((cell * (horizon_ + 1) + s.t) * combos_.size() + k);
}

std::optional<RoverState> StateIndexer::state_of(StateIndex i) const {
    if (i >= rover_states_)
        return std::nullopt;
    std::size_t rest = i;
    const Tracking& flags = combos_[rest % combos_.size()];
    rest /= combos_.size();
    const int t = static_cast<int>(rest % (horizon_ + 1));
    rest /= horizon_ + 1;
    const int y = static_cast<int>(rest % height_) + 1;
    const int x = static_cast<int>(rest / height_) + 1;
    return RoverState{x, y, t, flags.measured, flags.drilled, flags.visited};
}

RoverGridWorld::RoverGridWorld(GridConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const std::size_t cells = static_cast<std::size_t>(cfg_.width) * cfg_.height;

    std::vector<TargetId> tracked;
    target_by_cell_.assign(cells, -1);
    goal_cell_.assign(cells, 0);
    for (const Target& tgt : cfg_.targets) {
        target_by_cell_[cell_index(tgt.cell)] = static_cast<std::int32_t>(tgt.id);
        if (tgt.is_hibernation) {
            goal_cell_[cell_index(tgt.cell)] = 1;
        } else {
            tracked.push_back(tgt.id);
            science_mask_ |= 1u << tgt.id;
        }
    }
    indexer_ = StateIndexer(cfg_.width, cfg_.height, cfg_.horizon, cfg_.simplified, tracked);

    measurable_.assign(cells, 0);
    for (int x = 1; x <= cfg_.width; ++x) {
        for (int y = 1; y <= cfg_.height; ++y) {
            std::uint32_t mask = 0;
            for (TargetId id : tracked) {
                const Cell c = cfg_.targets[id].cell;
                if (std::abs(c.x - x) <= 1 && std::abs(c.y - y) <= 1)
                    mask |= 1u << id;
            }
            measurable_[cell_index({x, y})] = mask;
        }
    }

    static_penalty_.assign(cells, 0.0);
    for (Cell c : cfg_.shadows.obstacles)
        static_penalty_[cell_index(c)] = cfg_.shadows.obstacle_penalty;

    const std::size_t times = static_cast<std::size_t>(cfg_.horizon) + 1;
    shadowed_.assign(times * cells, 0);
    if (const auto& sweep = cfg_.shadows.sweep) {
        for (int t = 0; t <= cfg_.horizon; ++t) {
            const auto first = static_cast<long long>(std::floor(sweep->start_column + sweep->velocity * t));
            for (long long x = std::max(1LL, first);
                 x < first + sweep->width && x <= cfg_.width; ++x) {
                for (int y = 1; y <= cfg_.height; ++y)
                    shadowed_[t * cells + cell_index({static_cast<int>(x), y})] = 1;
            }
        }
    }
    for (const ShadowOverride& o : cfg_.shadows.overrides) {
        for (Cell c : o.cells)
            shadowed_[o.t * cells + cell_index(c)] = 1;
    }

    cost_.assign(times * cells, 0.0);
    for (std::size_t t = 0; t < times; ++t) {
        for (std::size_t c = 0; c < cells; ++c)
            cost_[t * cells + c] =
                static_penalty_[c] + (shadowed_[t * cells + c] ? cfg_.shadows.shadow_penalty : 0.0);
    }
}

bool RoverGridWorld::in_bounds(Cell c) const {
    return c.x >= 1 && c.x <= cfg_.width && c.y >= 1 && c.y <= cfg_.height;
}

std::optional<TargetId> RoverGridWorld::target_at(Cell c) const {
    if (!in_bounds(c))
        return std::nullopt;
    const std::int32_t id = target_by_cell_[cell_index(c)];
    if (id < 0)
        return std::nullopt;
    return static_cast<TargetId>(id);
}

bool RoverGridWorld::is_goal_cell(Cell c) const {
    return in_bounds(c) && goal_cell_[cell_index(c)] != 0;
}

bool RoverGridWorld::is_obstacle(Cell c) const {
    return in_bounds(c) && static_penalty_[cell_index(c)] != 0.0;
}

bool RoverGridWorld::is_shadowed(Cell c, int t) const {
    if (!in_bounds(c) || t < 0 || t > cfg_.horizon)
        return false;
    const std::size_t cells = static_cast<std::size_t>(cfg_.width) * cfg_.height;
    return shadowed_[t * cells + cell_index(c)] != 0;
}

double RoverGridWorld::obstacle_cost(Cell c, int t) const {
    const std::size_t cells = static_cast<std::size_t>(cfg_.width) * cfg_.height;
    return cost_[static_cast<std::size_t>(t) * cells + cell_index(c)];
}

std::uint32_t RoverGridWorld::measurable_from(Cell c) const {
    return measurable_[cell_index(c)];
}

bool RoverGridWorld::target_done(const RoverState& s, TargetId id) const {
    const std::uint32_t bit = 1u << id;
    return cfg_.simplified ? (s.visited & bit) != 0 : (s.drilled & bit) != 0;
}

StepDistribution RoverGridWorld::step(const RoverState& s, RoverAction a) const {
    if (!in_bounds(s.cell()) || s.t < 0 || s.t > cfg_.horizon)
        throw ContractViolation("step from an out-of-range rover state");
    if (is_terminal(s))
        throw ContractViolation("step from a terminal rover state");
    const auto action = static_cast<ActionIndex>(a);
    if (action >= action_count())
        throw ContractViolation("action not available in this grid-world mode");

    StepDistribution dist;
    if (s.t == cfg_.horizon) {
        dist.outcomes[0] = {{s, true}, 1.0};
        dist.count = 1;
        return dist;
    }

    if (action < 4) {
        RoverState next = s;
        next.t = s.t + 1;
        switch (a) {
        case RoverAction::up: next.y = std::min(s.y + 1, cfg_.height); break;
        case RoverAction::down: next.y = std::max(s.y - 1, 1); break;
        case RoverAction::left: next.x = std::max(s.x - 1, 1); break;
        default: next.x = std::min(s.x + 1, cfg_.width); break;
        }
        if (cfg_.simplified) {
            if (const auto id = target_at(next.cell());
                id && !cfg_.targets[*id].is_hibernation && cfg_.targets[*id].window.contains(next.t))
                next.visited |= 1u << *id;
        }
        dist.outcomes[0] = {{next, false}, 1.0};
        dist.count = 1;
        return dist;
    }

    const auto here = target_at(s.cell());
    for (int d = 1; d <= 3; ++d) {
        const double weight = cfg_.activity_durations[d - 1];
        if (weight <= 0.0)
            continue;
        RoverState next = s;
        next.t = std::min(s.t + d, cfg_.horizon);
        if (a == RoverAction::measure) {
            next.measured |= measurable_from(s.cell());
        } else if (here && !cfg_.targets[*here].is_hibernation) {
            const std::uint32_t bit = 1u << *here;
            if ((s.measured & bit) && !(s.drilled & bit) && cfg_.targets[*here].window.contains(next.t))
                next.drilled |= bit;
        }
        if (dist.count > 0 && dist.outcomes[dist.count - 1].next.state == next) {
            dist.outcomes[dist.count - 1].probability += weight;
        } else {
            dist.outcomes[dist.count++] = {{next, false}, weight};
        }
    }
    return dist;
}

RewardParts RoverGridWorld::reward(const RoverState& s, RoverAction, const Successor& next) const {
    RewardParts parts;
    if (next.ends_episode) {
        parts.r_obst = cfg_.end_penalty;
        parts.total = parts.r_tgts + parts.r_obst;
        return parts;
    }
    const RoverState& n = next.state;
    const std::uint32_t new_measured = n.measured & ~s.measured;
    const std::uint32_t new_drilled = n.drilled & ~s.drilled;
    const std::uint32_t new_visited = n.visited & ~s.visited;
    for (const Target& tgt : cfg_.targets) {
        const std::uint32_t bit = 1u << tgt.id;
        if (new_measured & bit)
            parts.r_tgts += tgt.measure_reward;
        if (new_drilled & bit)
            parts.r_tgts += tgt.drill_reward;
        if (new_visited & bit)
            parts.r_tgts += tgt.visit_reward();
    }
    if (const auto id = target_at(n.cell());
        id && cfg_.targets[*id].is_hibernation && cfg_.targets[*id].window.contains(n.t))
        parts.r_tgts += cfg_.targets[*id].visit_reward();
    parts.r_obst = obstacle_cost(n.cell(), n.t);
    parts.total = parts.r_tgts + parts.r_obst;
    return parts;
}

} // namespace roverplan::rover
