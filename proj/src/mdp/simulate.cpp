#include "roverplan/mdp/simulate.hpp"

#include "roverplan/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace roverplan::mdp {

Trace simulate(const TabularMdp& mdp, const Policy& policy, StateIndex s0, std::uint64_t seed,
               std::size_t step_cap) {
    if (s0 >= mdp.state_count())
        throw ContractViolation("start state " + std::to_string(s0) + " out of range");
    if (step_cap < 1)
        throw ContractViolation("simulate needs step_cap >= 1");
    if (policy.actions.size() != mdp.state_count())
        throw ContractViolation("policy size does not match the MDP");

    Rng rng(seed);
    Trace trace;
    StateIndex s = s0;
    double factor = 1.0;
    while (!mdp.is_terminal(s) && trace.steps.size() < step_cap) {
        const ActionIndex a = policy.actions[s];
        if (a >= mdp.action_count() || !mdp.has_action(s, a))
            throw ContractViolation("policy prescribes an action without transitions at state " +
                                    std::to_string(s));
        const auto entries = mdp.packed(s, a);
        const std::size_t pick = sample_successor(rng, entries.size(), [&](std::size_t k) {
            return mdp.outcome(entries[k].outcome).probability;
        });
        const double reward = mdp.outcome(entries[pick].outcome).reward;
        trace.steps.push_back({s, a, reward});
        trace.discounted_return += factor * reward;
        trace.undiscounted_return += reward;
        factor *= mdp.discount();
        s = entries[pick].next;
    }
    trace.final_state = s;
    return trace;
}

ReturnStats summarize_returns(std::span<const double> returns) {
    ReturnStats stats;
    if (returns.empty())
        return stats;
    double sum = 0.0;
    for (double r : returns)
        sum += r;
    const double n = static_cast<double>(returns.size());
    stats.mean = sum / n;
    if (returns.size() > 1) {
        double squares = 0.0;
        for (double r : returns)
            squares += (r - stats.mean) * (r - stats.mean);
        stats.std_error = std::sqrt(squares / (n - 1.0)) / std::sqrt(n);
    }
    return stats;
}

ReturnStats evaluate_policy(const TabularMdp& mdp, const Policy& policy, StateIndex s0,
                            std::size_t n_rollouts, std::uint64_t base_seed,
                            std::size_t step_cap) {
    if (n_rollouts < 1)
        throw ContractViolation("evaluate_policy needs at least one rollout");
    std::vector<double> returns;
    returns.reserve(n_rollouts);
    for (std::size_t k = 0; k < n_rollouts; ++k)
        returns.push_back(simulate(mdp, policy, s0, base_seed + k, step_cap).discounted_return);
    return summarize_returns(returns);
}

} // namespace roverplan::mdp
