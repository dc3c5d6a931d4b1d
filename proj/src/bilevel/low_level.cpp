#include "roverplan/bilevel/low_level.hpp"

#include "roverplan/errors.hpp"

namespace roverplan::bilevel {

using rover::RoverAction;
using rover::RoverGridWorld;

LowLevelMdp LowLevelMdp::for_target(const RoverGridWorld& env, TargetId focal) {
    if (focal >= env.config().targets.size())
        throw ContractViolation("low-level target " + std::to_string(focal) + " is not configured");
    return LowLevelMdp(env, focal);
}

LowLevelMdp LowLevelMdp::wind_down(const RoverGridWorld& env) {
    return LowLevelMdp(env, std::nullopt);
}

LowLevelMdp::LowLevelMdp(const RoverGridWorld& env, std::optional<TargetId> focal)
    : width_(env.width()), height_(env.height()), horizon_(env.horizon()), focal_(focal) {
    const rover::GridConfig& cfg = env.config();
    const bool science_focal = focal && !cfg.targets[*focal].is_hibernation;
    const std::uint32_t focal_bit = focal ? 1u << *focal : 0;
    bits_ = science_focal && !cfg.simplified ? 2 : 1;

    const std::size_t telemetry = static_cast<std::size_t>(width_) * height_ * (horizon_ + 1) * bits_;
    const std::size_t actions = env.action_count();
    mdp::TabularMdpBuilder builder(telemetry + 1, actions, env.discount());
    const auto absorbing_index = static_cast<StateIndex>(telemetry);

    for (StateIndex i = 0; i < telemetry; ++i) {
        const LowLevelState ll = *state_of(i);
        const auto& tm = ll.telemetry;
        RoverState flat{tm.x, tm.y, tm.t, 0, 0, 0};
        if (focal) {
            if (ll.measured_current)
                flat.measured = focal_bit;
        } else if (cfg.simplified) {
            flat.visited = env.science_mask();
        } else {
            flat.measured = flat.drilled = env.science_mask();
        }

        bool terminal = env.is_terminal(flat);
        if (focal) {
            terminal = terminal || tm.t == horizon_;
            if (science_focal && cfg.simplified) {
                const auto& tgt = cfg.targets[*focal];
                terminal = terminal || (flat.cell() == tgt.cell && tm.t >= tgt.window.open);
            }
        }
        if (terminal) {
            builder.mark_terminal(i);
            continue;
        }

        for (ActionIndex a = 0; a < actions; ++a) {
            const auto action = static_cast<RoverAction>(a);
            for (const auto& o : env.step(flat, action)) {
                const auto parts = env.reward(flat, action, o.next);
                double reward = parts.r_obst;
                StateIndex next = absorbing_index;
                if (!o.next.ends_episode) {
                    const RoverState& n = o.next.state;
                    if (focal) {
                        const auto& tgt = cfg.targets[*focal];
                        if (n.measured & ~flat.measured & focal_bit)
                            reward += tgt.measure_reward;
                        if (n.drilled & ~flat.drilled & focal_bit)
                            reward += tgt.drill_reward;
                        if (n.visited & ~flat.visited & focal_bit)
                            reward += tgt.visit_reward();
                        if (tgt.is_hibernation && n.cell() == tgt.cell && tgt.window.contains(n.t))
                            reward += tgt.visit_reward();
                        if (!(n.drilled & focal_bit))
                            next = index_of({{n.x, n.y, n.t}, (n.measured & focal_bit) != 0});
                    } else {
                        // Science flags are saturated, so only hibernation pays.
                        reward = parts.total;
                        next = index_of({{n.x, n.y, n.t}, false});
                    }
                }
                builder.add(i, a, next, o.probability, reward);
            }
        }
    }
    builder.mark_terminal(absorbing_index);
    mdp_ = builder.build();
}

StateIndex LowLevelMdp::index_of(const LowLevelState& s) const {
    const auto& tm = s.telemetry;
    if (tm.x < 1 || tm.x > width_ || tm.y < 1 || tm.y > height_ || tm.t < 0 || tm.t > horizon_)
        throw ContractViolation("low-level state out of range");
    const std::size_t cell = static_cast<std::size_t>(tm.x - 1) * height_ + (tm.y - 1);
    const std::size_t bit = bits_ == 2 && s.measured_current ? 1 : 0;
    return static_cast<StateIndex>((cell * (horizon_ + 1) + tm.t) * bits_ + bit);
}

StateIndex LowLevelMdp::project(const RoverState& s) const {
    if (focal_ && (s.drilled & (1u << *focal_)) && bits_ == 2)
        return absorbing();
    return index_of(focal_ ? subset_of(s, *focal_) : LowLevelState{telemetry_of(s), false});
}

std::optional<LowLevelState> LowLevelMdp::state_of(StateIndex i) const {
    const std::size_t telemetry = static_cast<std::size_t>(width_) * height_ * (horizon_ + 1) * bits_;
    if (i >= telemetry)
        return std::nullopt;
    std::size_t rest = i;
    const bool bit = bits_ == 2 && rest % 2 == 1;
    rest /= bits_;
    const int t = static_cast<int>(rest % (horizon_ + 1));
    rest /= horizon_ + 1;
    const int y = static_cast<int>(rest % height_) + 1;
    const int x = static_cast<int>(rest / height_) + 1;
    return LowLevelState{{x, y, t}, bit};
}

} // namespace roverplan::bilevel
