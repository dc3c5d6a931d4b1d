#include "roverplan/mdp/brute_force.hpp"

#include "roverplan/errors.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace roverplan::mdp {

namespace {

struct Expectimax {
    const TabularMdp& mdp;
    std::uint64_t budget;
    std::uint64_t expanded = 0;

    double value(StateIndex s, std::size_t depth) {
        if (depth == 0 || mdp.is_terminal(s))
            return 0.0;
        if (++expanded > budget)
            throw ResourceError("brute_force_return exceeded its budget of " +
                                std::to_string(budget) + " nodes");
        double best = -std::numeric_limits<double>::infinity();
        for (ActionIndex a = 0; a < mdp.action_count(); ++a) {
            if (!mdp.has_action(s, a))
                continue;
            double q = 0.0;
            for (const TransitionEntry e : mdp.transitions(s, a))
                q += e.probability * (e.reward + mdp.discount() * value(e.next, depth - 1));
            best = std::max(best, q);
        }
        return best;
    }
};

} // namespace

double brute_force_return(const TabularMdp& mdp, StateIndex s0, std::size_t depth,
                          std::uint64_t node_budget) {
    if (s0 >= mdp.state_count())
        throw ContractViolation("start state out of range");
    Expectimax search{mdp, node_budget};
    return search.value(s0, depth);
}

} // namespace roverplan::mdp
