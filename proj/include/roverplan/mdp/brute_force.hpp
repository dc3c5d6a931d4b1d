#pragma once

#include "roverplan/mdp/tabular_mdp.hpp"

#include <cstdint>

namespace roverplan::mdp {

inline constexpr std::uint64_t kBruteForceNodeBudget = 10'000'000;

/// Optimal expected discounted return over all action sequences of at most
/// `depth` steps, by exhaustive expectimax without memoization. A testing
/// oracle for value_iteration; throws ResourceError once more than
/// `node_budget` decision nodes would be expanded.
double brute_force_return(const TabularMdp& mdp, StateIndex s0, std::size_t depth,
                          std::uint64_t node_budget = kBruteForceNodeBudget);

} // namespace roverplan::mdp
