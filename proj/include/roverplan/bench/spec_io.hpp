#pragma once

#include "roverplan/bench/experiment.hpp"
#include "roverplan/bench/sweep.hpp"
#include "roverplan/rover/config_io.hpp"

#include <json.hpp>

namespace roverplan::bench {

/// Experiment settings from a configuration document's `experiment` section
/// (defaults when absent). Unknown keys throw ConfigError.
ExperimentSpec parse_experiment(const rover::ConfigDocument& doc);

/// Sweep settings from a configuration document's `sweep` section.
SweepSpec parse_sweep(const nlohmann::json& section);

bilevel::HeuristicSpec parse_heuristic(const nlohmann::json& section);

} // namespace roverplan::bench
