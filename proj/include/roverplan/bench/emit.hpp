#pragma once

#include "roverplan/bench/contingency.hpp"
#include "roverplan/bench/experiment.hpp"
#include "roverplan/bench/sweep.hpp"

#include <filesystem>
#include <span>
#include <string>

namespace roverplan::bench {

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

/// Header `solver,iter_cap,wall_time_s,mean_return,std_error,converged,seed`
/// plus one line per row, `\n` line endings.
std::string results_csv(std::span<const ResultRow> rows);
std::string results_json(std::span<const ResultRow> rows);
/// Wall time (log x) against mean return with +-1 standard-error bands, one
/// series per solver. Rows with errors or zero wall time are left out.
std::string results_svg(std::span<const ResultRow> rows);

std::string sweep_csv(std::span<const SweepRow> rows);
std::string sweep_json(std::span<const SweepRow> rows);
std::string contingency_json(const rover::RoverGridWorld& env, const ContingencyReport& report);

/// Writes `content` to `path`, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace roverplan::bench
