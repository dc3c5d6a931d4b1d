#include "roverplan/bilevel/high_level.hpp"

#include "roverplan/errors.hpp"

namespace roverplan::bilevel {

mdp::TabularMdp build_high_level(const rover::RoverGridWorld& env, const MissionSpec& mission,
                                 const TransitionOracle& transition) {
    mission.validate(env.config());
    const rover::StateIndexer& index = env.indexer();
    const std::size_t actions = mission.targets.size();
    mdp::TabularMdpBuilder builder(index.state_count(), actions, env.discount());
    builder.reserve(index.rover_state_count() * actions);

    std::vector<HeuristicOutcome> outcomes(actions);
    for (StateIndex s = 0; s < index.rover_state_count(); ++s) {
        const RoverState state = *index.state_of(s);
        bool terminal = env.is_terminal(state);
        if (!terminal) {
            bool all_done = true;
            for (TargetId id : index.tracked_targets())
                all_done = all_done && env.target_done(state, id);
            terminal = all_done;
        }
        if (!terminal) {
            bool any_feasible = false;
            for (std::size_t k = 0; k < actions; ++k) {
                outcomes[k] = transition(state, k);
                any_feasible = any_feasible || (outcomes[k].feasible && !(outcomes[k].next == state));
            }
            terminal = !any_feasible;
        }
        if (terminal) {
            builder.mark_terminal(s);
            continue;
        }
        for (std::size_t k = 0; k < actions; ++k) {
            const HeuristicOutcome& o = outcomes[k];
            if (!o.feasible || o.next == state) {
                builder.add(s, static_cast<ActionIndex>(k), s, 1.0, 0.0);
                continue;
            }
            const auto next = index.index_of(o.next);
            if (!next)
                throw ContractViolation("heuristic produced a state outside the enumeration");
            builder.add(s, static_cast<ActionIndex>(k), *next, 1.0, o.estimated_reward);
        }
    }
    builder.mark_terminal(index.sink());
    return builder.build();
}

mdp::TabularMdp build_high_level(const rover::RoverGridWorld& env, const MissionSpec& mission,
                                 const HeuristicSpec& spec) {
    mission.validate(env.config());
    const CoarseHeuristic heuristic(env, mission, spec);
    return build_high_level(env, mission, [&](const RoverState& s, std::size_t slot) {
        return heuristic.transition(s, mission.targets[slot]);
    });
}

} // namespace roverplan::bilevel
