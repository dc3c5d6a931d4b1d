#pragma once

#include "roverplan/bilevel/heuristic.hpp"
#include "roverplan/rover/grid_config.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace roverplan::bench {

/// Randomized instances of growing size, each solved flat and bi-level.
struct SweepSpec {
    std::vector<int> grid_sizes{10, 20, 30, 40, 50};
    std::size_t science_targets = 4;
    bool hibernation = true;
    /// horizon = horizon_factor * grid size.
    int horizon_factor = 2;
    /// Random obstacle cells per instance, as a fraction of the grid cells.
    double obstacle_fraction = 0.02;
    /// Shadow band moving one column every 1 / shadow_velocity timesteps.
    double shadow_velocity = 0.5;
    int shadow_width = 2;
    double discount = 0.95;
    std::array<double, 3> activity_durations{1.0 / 3, 1.0 / 3, 1.0 / 3};
    std::uint64_t base_seed = 0;
    std::size_t n_sims = 200;
    double tolerance = 1e-6;
    bilevel::HeuristicSpec heuristic;
    /// Sizes whose flat MDP would exceed this many states are skipped.
    std::size_t max_flat_states = 25'000'000;
    bool timing = true;

    void validate() const;
};

struct SweepRow {
    int size = 0;
    std::size_t flat_states = 0;
    double flat_mean_return = 0.0;
    double flat_std_error = 0.0;
    double bl_mean_return = 0.0;
    double bl_std_error = 0.0;
    double reward_ratio = 0.0;
    double flat_wall_time_s = 0.0;
    double bl_wall_time_s = 0.0;
    double time_ratio = 0.0;
    /// Non-empty when the size failed or was skipped.
    std::string error;
};

/// Instance for one size: targets, hibernation area and obstacles at
/// distinct random cells (never the start cell (1,1)), drawn from a generator
/// seeded by derive_seed(base_seed, size).
rover::GridConfig sweep_instance(const SweepSpec& spec, int size);

/// Runs the sizes in order; `progress` (if set) sees each finished row.
std::vector<SweepRow> run_complexity_sweep(const SweepSpec& spec,
                                           const std::function<void(const SweepRow&)>& progress = {});

} // namespace roverplan::bench
