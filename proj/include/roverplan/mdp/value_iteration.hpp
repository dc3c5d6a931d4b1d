#pragma once

#include "roverplan/mdp/tabular_mdp.hpp"

#include <optional>

namespace roverplan::mdp {

inline constexpr double kDefaultTolerance = 1e-6;
inline constexpr std::size_t kDefaultMaxIterations = 10'000;

/// Relative gap under which two action values count as tied; the lower
/// ActionIndex wins a tie. Keeps argmax stable against rounding noise from
/// different summation paths.
inline constexpr double kTieRelativeTolerance = 1e-12;

struct ValueIterationOptions {
    double tolerance = kDefaultTolerance;
    std::size_t max_iterations = kDefaultMaxIterations;
    /// Starting iterate; zero when empty. Terminal entries are forced to 0.
    std::optional<ValueFunction> initial;
    /// Worker threads per sweep. Results are bitwise identical for any count.
    unsigned threads = 1;
};

/// Expected one-step lookahead sum_{s'} p (r + discount * v(s')).
double q_value(const TabularMdp& mdp, const ValueFunction& v, StateIndex s, ActionIndex a);

struct Backup {
    double value;
    ActionIndex best;
};

/// Max over legal actions of q_value; `best` is the lowest index within the
/// tie tolerance of the max. Throws ContractViolation for terminal `s`.
Backup bellman_backup(const TabularMdp& mdp, const ValueFunction& v, StateIndex s);

/// Greedy policy with respect to `v`. Terminal states get kNoAction.
Policy extract_policy(const TabularMdp& mdp, const ValueFunction& v);

/// Synchronous (Jacobi) value iteration: every sweep reads only the previous
/// iterate. Stops when the max-norm change drops below the tolerance or the
/// iteration cap is reached.
SolveReport value_iteration(const TabularMdp& mdp, const ValueIterationOptions& options = {});

inline SolveReport value_iteration(const TabularMdp& mdp, double tolerance,
                                   std::size_t max_iterations) {
    ValueIterationOptions options;
    options.tolerance = tolerance;
    options.max_iterations = max_iterations;
    return value_iteration(mdp, options);
}

/// Iterative evaluation of a fixed deterministic policy.
ValueFunction evaluate_policy_exact(const TabularMdp& mdp, const Policy& policy,
                                    double tolerance = 1e-12,
                                    std::size_t max_iterations = 1'000'000);

} // namespace roverplan::mdp
