#pragma once

#include "roverplan/mdp/tabular_mdp.hpp"
#include "roverplan/rng.hpp"

#include <cstdint>
#include <span>

namespace roverplan::mdp {

inline constexpr std::size_t kDefaultStepCap = 100'000;

/// Picks a successor slot. Single-successor transitions consume no random
/// numbers; otherwise exactly one uniform draw is made. Every sampler in the
/// project goes through here so that identical action sequences under the same
/// seed see identical outcomes.
template <class ProbabilityAt>
std::size_t sample_successor(Rng& rng, std::size_t count, ProbabilityAt&& probability_at) {
    if (count == 1)
        return 0;
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (std::size_t k = 0; k + 1 < count; ++k) {
        cumulative += probability_at(k);
        if (u < cumulative)
            return k;
    }
    return count - 1;
}

/// Runs `policy` from `s0` until a terminal state or `step_cap` steps.
Trace simulate(const TabularMdp& mdp, const Policy& policy, StateIndex s0, std::uint64_t seed,
               std::size_t step_cap = kDefaultStepCap);

struct ReturnStats {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error (n - 1 denominator; 0 for a single sample).
ReturnStats summarize_returns(std::span<const double> returns);

/// Mean discounted return over rollouts seeded base_seed .. base_seed + n - 1.
ReturnStats evaluate_policy(const TabularMdp& mdp, const Policy& policy, StateIndex s0,
                            std::size_t n_rollouts, std::uint64_t base_seed,
                            std::size_t step_cap = kDefaultStepCap);

} // namespace roverplan::mdp
