#include "roverplan/mdp/value_iteration.hpp"

#include "roverplan/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>

namespace roverplan::mdp {

namespace {

/// One Jacobi sweep over states [begin, end). Returns the max-norm change.
double sweep_range(const TabularMdp& mdp, const std::vector<double>& current,
                   std::vector<double>& next, StateIndex begin, StateIndex end) {
    const double discount = mdp.discount();
    const auto outcomes = mdp.outcome_table();
    const std::size_t actions = mdp.action_count();
    double residual = 0.0;
    for (StateIndex s = begin; s < end; ++s) {
        if (mdp.is_terminal(s)) {
            next[s] = 0.0;
            residual = std::max(residual, std::abs(current[s]));
            continue;
        }
        const TabularMdp::PackedEntry* entry = mdp.packed_state(s).data();
        double best = -std::numeric_limits<double>::infinity();
        for (ActionIndex a = 0; a < actions; ++a) {
            const std::uint16_t count = mdp.entries_for(s, a);
            if (count == 0)
                continue;
            double q = 0.0;
            for (std::uint16_t k = 0; k < count; ++k, ++entry) {
                const auto& o = outcomes[entry->outcome];
                q += o.probability * (o.reward + discount * current[entry->next]);
            }
            best = std::max(best, q);
        }
        next[s] = best;
        residual = std::max(residual, std::abs(best - current[s]));
    }
    return residual;
}

double sweep(const TabularMdp& mdp, const std::vector<double>& current, std::vector<double>& next,
             unsigned threads) {
    const auto states = static_cast<StateIndex>(mdp.state_count());
    if (threads <= 1 || states < 2 * threads)
        return sweep_range(mdp, current, next, 0, states);

    std::vector<double> partial(threads, 0.0);
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        const StateIndex chunk = (states + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const StateIndex begin = std::min(states, static_cast<StateIndex>(w * chunk));
            const StateIndex end = std::min(states, static_cast<StateIndex>(begin + chunk));
            workers.emplace_back([&, w, begin, end] {
                partial[w] = sweep_range(mdp, current, next, begin, end);
            });
        }
    }
    return *std::max_element(partial.begin(), partial.end());
}

bool ties(double q, double best) {
    return std::abs(best - q) <= kTieRelativeTolerance * std::max(std::abs(q), std::abs(best));
}

} // namespace

double q_value(const TabularMdp& mdp, const ValueFunction& v, StateIndex s, ActionIndex a) {
    const double discount = mdp.discount();
    double q = 0.0;
    for (const auto& e : mdp.packed(s, a)) {
        const auto& o = mdp.outcome(e.outcome);
        q += o.probability * (o.reward + discount * v.values[e.next]);
    }
    return q;
}

Backup bellman_backup(const TabularMdp& mdp, const ValueFunction& v, StateIndex s) {
    if (s >= mdp.state_count())
        throw ContractViolation("state " + std::to_string(s) + " out of range");
    if (mdp.is_terminal(s))
        throw ContractViolation("bellman_backup called on terminal state " + std::to_string(s));

    const std::size_t actions = mdp.action_count();
    double best = -std::numeric_limits<double>::infinity();
    for (ActionIndex a = 0; a < actions; ++a) {
        if (mdp.has_action(s, a))
            best = std::max(best, q_value(mdp, v, s, a));
    }
    for (ActionIndex a = 0; a < actions; ++a) {
        if (mdp.has_action(s, a) && ties(q_value(mdp, v, s, a), best))
            return {best, a};
    }
    throw ContractViolation("state " + std::to_string(s) + " has no legal action");
}

Policy extract_policy(const TabularMdp& mdp, const ValueFunction& v) {
    if (v.values.size() != mdp.state_count())
        throw ContractViolation("value function size does not match the MDP");
    Policy policy;
    policy.actions.assign(mdp.state_count(), kNoAction);
    for (StateIndex s = 0; s < mdp.state_count(); ++s) {
        if (!mdp.is_terminal(s))
            policy.actions[s] = bellman_backup(mdp, v, s).best;
    }
    return policy;
}

SolveReport value_iteration(const TabularMdp& mdp, const ValueIterationOptions& options) {
    if (!(options.tolerance > 0.0))
        throw ConfigError("value iteration tolerance must be positive");
    if (options.max_iterations < 1)
        throw ConfigError("value iteration needs max_iterations >= 1");

    const auto start = std::chrono::steady_clock::now();
    mdp.validate();

    const std::size_t n = mdp.state_count();
    std::vector<double> current(n, 0.0);
    if (options.initial) {
        if (options.initial->values.size() != n)
            throw ContractViolation("initial value function size does not match the MDP");
        current = options.initial->values;
        for (StateIndex s = 0; s < n; ++s)
            if (mdp.is_terminal(s))
                current[s] = 0.0;
    }
    std::vector<double> next(n, 0.0);

    SolveReport report;
    for (StateIndex s = 0; s < n; ++s) {
        if (mdp.is_terminal(s))
            continue;
        for (ActionIndex a = 0; a < mdp.action_count(); ++a)
            report.backups_per_sweep += mdp.has_action(s, a) ? 1 : 0;
    }

    double residual = std::numeric_limits<double>::infinity();
    while (report.iterations < options.max_iterations) {
        residual = sweep(mdp, current, next, options.threads);
        current.swap(next);
        ++report.iterations;
        report.residual_history.push_back(residual);
        if (residual < options.tolerance)
            break;
    }

    report.value_function.values = std::move(current);
    report.policy = extract_policy(mdp, report.value_function);
    report.bellman_residual = residual;
    report.converged = residual < options.tolerance;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ValueFunction evaluate_policy_exact(const TabularMdp& mdp, const Policy& policy, double tolerance,
                                    std::size_t max_iterations) {
    const std::size_t n = mdp.state_count();
    if (policy.actions.size() != n)
        throw ContractViolation("policy size does not match the MDP");
    ValueFunction current{std::vector<double>(n, 0.0)};
    ValueFunction next{std::vector<double>(n, 0.0)};
    for (std::size_t it = 0; it < max_iterations; ++it) {
        double residual = 0.0;
        for (StateIndex s = 0; s < n; ++s) {
            next.values[s] = mdp.is_terminal(s) ? 0.0 : q_value(mdp, current, s, policy.actions[s]);
            residual = std::max(residual, std::abs(next.values[s] - current.values[s]));
        }
        std::swap(current, next);
        if (residual < tolerance)
            break;
    }
    return current;
}

} // namespace roverplan::mdp
