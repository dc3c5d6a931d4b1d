#include "roverplan/rover/enumerate.hpp"

#include <algorithm>

namespace roverplan::rover {

FlatMdp enumerate(const RoverGridWorld& env) {
    const StateIndexer& index = env.indexer();
    const std::size_t actions = env.action_count();
    mdp::TabularMdpBuilder builder(index.state_count(), actions, env.discount());

    const std::size_t outcomes_per_activity = static_cast<std::size_t>(std::count_if(
        env.config().activity_durations.begin(), env.config().activity_durations.end(),
        [](double w) { return w > 0.0; }));
    builder.reserve(index.rover_state_count() *
                    (4 + (actions > 4 ? 2 * outcomes_per_activity : 0)));

    for (StateIndex s = 0; s < index.rover_state_count(); ++s) {
        const RoverState state = *index.state_of(s);
        if (env.is_terminal(state)) {
            builder.mark_terminal(s);
            continue;
        }
        for (ActionIndex a = 0; a < actions; ++a) {
            const auto action = static_cast<RoverAction>(a);
            for (const StepOutcome& o : env.step(state, action)) {
                const StateIndex next =
                    o.next.ends_episode ? index.sink() : index.index_unchecked(o.next.state);
                builder.add(s, a, next, o.probability, env.reward(state, action, o.next).total);
            }
        }
    }
    builder.mark_terminal(index.sink());
    return FlatMdp{builder.build(), index};
}

FlatMdp enumerate(const GridConfig& cfg) {
    return enumerate(RoverGridWorld(cfg));
}

std::size_t flat_state_count(const GridConfig& cfg) {
    return RoverGridWorld(cfg).indexer().state_count();
}

} // namespace roverplan::rover
