#include "roverplan/bench/sweep.hpp"

#include "roverplan/bilevel/planner.hpp"
#include "roverplan/errors.hpp"
#include "roverplan/mdp/simulate.hpp"
#include "roverplan/mdp/value_iteration.hpp"
#include "roverplan/rng.hpp"
#include "roverplan/rover/enumerate.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace roverplan::bench {

using rover::Cell;
using rover::RoverState;

void SweepSpec::validate() const {
    if (grid_sizes.empty())
        throw ConfigError("the sweep needs at least one grid size");
    for (int size : grid_sizes) {
        if (size < 2)
            throw ConfigError("sweep grid sizes must be at least 2");
    }
    if (horizon_factor < 1)
        throw ConfigError("horizon_factor must be at least 1");
    if (!(obstacle_fraction >= 0.0 && obstacle_fraction < 0.5))
        throw ConfigError("obstacle_fraction must lie in [0, 0.5)");
    if (shadow_width < 0)
        throw ConfigError("shadow_width must be non-negative");
    if (n_sims < 1)
        throw ConfigError("n_sims must be at least 1");
    if (!(tolerance > 0.0))
        throw ConfigError("tolerance must be positive");
    heuristic.validate();
}

rover::GridConfig sweep_instance(const SweepSpec& spec, int size) {
    Rng rng(derive_seed(spec.base_seed, static_cast<std::uint64_t>(size)));
    std::set<std::pair<int, int>> used{{1, 1}};
    auto draw_cell = [&] {
        for (;;) {
            const Cell c{1 + static_cast<int>(rng.below(size)), 1 + static_cast<int>(rng.below(size))};
            if (used.insert({c.x, c.y}).second)
                return c;
        }
    };

    rover::GridConfig cfg;
    cfg.width = cfg.height = size;
    cfg.horizon = spec.horizon_factor * size;
    cfg.discount = spec.discount;
    cfg.activity_durations = spec.activity_durations;
    const std::size_t total = spec.science_targets + (spec.hibernation ? 1 : 0);
    if (total + 1 > static_cast<std::size_t>(size) * size)
        throw ConfigError("grid of size " + std::to_string(size) + " cannot hold the sweep targets");
    for (std::size_t k = 0; k < total; ++k) {
        rover::Target t;
        t.id = static_cast<rover::TargetId>(k);
        t.cell = draw_cell();
        t.window = {0, cfg.horizon};
        if (k == spec.science_targets) {
            t.is_hibernation = true;
            t.measure_reward = 0.0;
            t.drill_reward = rover::kDefaultHibernationReward;
        }
        cfg.targets.push_back(t);
    }
    const auto obstacles = static_cast<std::size_t>(std::floor(spec.obstacle_fraction * size * size));
    for (std::size_t k = 0; k < obstacles && used.size() < static_cast<std::size_t>(size) * size; ++k)
        cfg.shadows.obstacles.push_back(draw_cell());
    if (spec.shadow_width > 0)
        cfg.shadows.sweep = rover::ShadowSweep{1.0, spec.shadow_velocity, spec.shadow_width};
    cfg.validate();
    return cfg;
}

std::vector<SweepRow> run_complexity_sweep(const SweepSpec& spec,
                                           const std::function<void(const SweepRow&)>& progress) {
    spec.validate();
    std::vector<SweepRow> rows;
    for (int size : spec.grid_sizes) {
        SweepRow row;
        row.size = size;
        try {
            const rover::GridConfig cfg = sweep_instance(spec, size);
            row.flat_states = rover::flat_state_count(cfg);
            if (row.flat_states > spec.max_flat_states)
                throw ResourceError("flat MDP with " + std::to_string(row.flat_states) +
                                    " states exceeds the sweep limit");
            const RoverState start{1, 1, 0, 0, 0, 0};

            {
                // Scoped so the flat MDP is released before the bi-level build.
                const rover::FlatMdp flat = rover::enumerate(cfg);
                const mdp::SolveReport report =
                    mdp::value_iteration(flat.mdp, spec.tolerance, mdp::kDefaultMaxIterations);
                const auto stats = mdp::evaluate_policy(flat.mdp, report.policy, *flat.index.index_of(start),
                                                        spec.n_sims, spec.base_seed);
                row.flat_mean_return = stats.mean;
                row.flat_std_error = stats.std_error;
                row.flat_wall_time_s = report.wall_time;
            }

            bilevel::SolverSettings settings;
            settings.tolerance = spec.tolerance;
            bilevel::BiLevelPolicy policy = bilevel::solve_bilevel(
                cfg, bilevel::MissionSpec::all_targets(cfg), spec.heuristic, settings);
            std::vector<double> returns;
            for (std::size_t k = 0; k < spec.n_sims; ++k)
                returns.push_back(bilevel::plan(policy, start, spec.base_seed + k).discounted_return);
            const auto stats = mdp::summarize_returns(returns);
            row.bl_mean_return = stats.mean;
            row.bl_std_error = stats.std_error;
            row.bl_wall_time_s = policy.stats().aggregate_wall_time();

            row.reward_ratio = row.bl_mean_return / row.flat_mean_return;
            row.time_ratio = row.bl_wall_time_s / row.flat_wall_time_s;
            if (!spec.timing)
                row.flat_wall_time_s = row.bl_wall_time_s = row.time_ratio = 0.0;
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
        if (progress)
            progress(row);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace roverplan::bench
