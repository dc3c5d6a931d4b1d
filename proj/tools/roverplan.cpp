/// Command-line front end: solve, simulate, trade-off experiments, complexity
/// sweeps, contingency planning and rendering.

#include "roverplan/bench/contingency.hpp"
#include "roverplan/bench/emit.hpp"
#include "roverplan/bench/experiment.hpp"
#include "roverplan/bench/spec_io.hpp"
#include "roverplan/bench/sweep.hpp"
#include "roverplan/bilevel/planner.hpp"
#include "roverplan/errors.hpp"
#include "roverplan/mdp/simulate.hpp"
#include "roverplan/mdp/value_iteration.hpp"
#include "roverplan/rl/td_learning.hpp"
#include "roverplan/rover/config_io.hpp"
#include "roverplan/rover/enumerate.hpp"
#include "roverplan/rover/render.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace roverplan;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNotConverged = 4;

struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
    std::string solver = "vi";
    double tol = mdp::kDefaultTolerance;
    std::size_t max_iters = mdp::kDefaultMaxIterations;
    std::optional<std::size_t> n_sims;
    bool require_converged = false;
    std::string start = "1,1,0";
    std::size_t episodes = 50'000;
    unsigned threads = 1;
    std::string states;
    std::size_t random_states = 0;
    int shadow_time = 0;
};

rover::RoverState parse_state(const std::string& text) {
    std::stringstream in(text);
    std::vector<int> parts;
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            parts.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("state '" + text + "' must be x,y or x,y,t");
        }
    }
    if (parts.size() < 2 || parts.size() > 3)
        throw ConfigError("state '" + text + "' must be x,y or x,y,t");
    return {parts[0], parts[1], parts.size() == 3 ? parts[2] : 0, 0, 0, 0};
}

std::vector<rover::RoverState> parse_states(const std::string& text) {
    std::vector<rover::RoverState> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
        if (!item.empty())
            out.push_back(parse_state(item));
    }
    return out;
}

void emit(const Options& o, const std::string& name, const std::string& content) {
    if (o.out.empty()) {
        std::cout << content;
        return;
    }
    bench::write_file(fs::path(o.out) / name, content);
    std::cout << "wrote " << (fs::path(o.out) / name).string() << '\n';
}

bilevel::SolverSettings settings_of(const Options& o) {
    return {o.tol, o.max_iters, o.threads};
}

struct SolvedPolicy {
    std::optional<rover::FlatMdp> flat;
    mdp::Policy flat_policy;
    std::optional<bilevel::BiLevelPolicy> bilevel;
    double wall_time = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    double residual = 0.0;
};

SolvedPolicy solve_with(const Options& o, const rover::ConfigDocument& doc) {
    SolvedPolicy out;
    const bench::SolverKind kind = bench::parse_solver(o.solver);
    if (kind == bench::SolverKind::bl_vi) {
        const auto heuristic = bench::parse_experiment(doc).heuristic;
        out.bilevel.emplace(bilevel::solve_bilevel(doc.grid, bilevel::MissionSpec::all_targets(doc.grid),
                                                   heuristic, settings_of(o)));
        out.iterations = out.bilevel->hl_report().iterations;
        out.residual = out.bilevel->hl_report().bellman_residual;
        return out;
    }
    out.flat = rover::enumerate(doc.grid);
    if (kind == bench::SolverKind::vi) {
        mdp::ValueIterationOptions options;
        options.tolerance = o.tol;
        options.max_iterations = o.max_iters;
        options.threads = o.threads;
        const mdp::SolveReport report = mdp::value_iteration(out.flat->mdp, options);
        out.flat_policy = report.policy;
        out.wall_time = report.wall_time;
        out.converged = report.converged;
        out.iterations = report.iterations;
        out.residual = report.bellman_residual;
    } else {
        rl::LearnConfig cfg = bench::parse_experiment(doc).learning;
        cfg.episodes = o.episodes;
        cfg.seed = o.seed;
        cfg.start_state = out.flat->index.index_of(parse_state(o.start));
        cfg.eval_interval = std::max<std::size_t>(1, o.episodes / 10);
        cfg.eval_rollouts = 1;
        const rl::LearnResult result =
            kind == bench::SolverKind::qlearning ? rl::q_learning(out.flat->mdp, cfg) : rl::sarsa(out.flat->mdp, cfg);
        out.flat_policy = result.policy;
        out.wall_time = result.wall_time;
        out.converged = result.policy_stable;
        out.iterations = o.episodes;
    }
    return out;
}

/// Rollout trace from `start`, flat or bi-level.
mdp::Trace rollout(SolvedPolicy& solved, const rover::RoverState& start, std::uint64_t seed) {
    if (solved.bilevel)
        return bilevel::plan(*solved.bilevel, start, seed).trace;
    const auto s0 = solved.flat->index.index_of(start);
    if (!s0)
        throw ConfigError("start state is not a valid rover state");
    return mdp::simulate(solved.flat->mdp, solved.flat_policy, *s0, seed);
}

void finish_solve(const Options& o, SolvedPolicy& solved) {
    if (solved.bilevel) {
        const auto stats = solved.bilevel->stats();
        solved.wall_time = stats.aggregate_wall_time();
        solved.converged = stats.converged;
    }
    if (o.require_converged && !solved.converged)
        throw NotConverged("solver did not converge within the iteration cap");
}

int cmd_solve(const Options& o) {
    const auto doc = rover::load_config(o.config);
    SolvedPolicy solved = solve_with(o, doc);
    const auto start = parse_state(o.start);
    const mdp::Trace trace = rollout(solved, start, o.seed);
    finish_solve(o, solved);
    nlohmann::ordered_json summary;
    summary["solver"] = o.solver;
    summary["iterations"] = solved.iterations;
    summary["bellman_residual"] = solved.residual;
    summary["converged"] = solved.converged;
    summary["wall_time_s"] = solved.wall_time;
    summary["start"] = {start.x, start.y, start.t};
    summary["rollout_return"] = trace.discounted_return;
    emit(o, "solve.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto doc = rover::load_config(o.config);
    SolvedPolicy solved = solve_with(o, doc);
    const auto start = parse_state(o.start);
    const std::size_t n = o.n_sims.value_or(1);
    std::vector<double> returns;
    mdp::Trace first;
    for (std::size_t k = 0; k < n; ++k) {
        mdp::Trace trace = rollout(solved, start, o.seed + k);
        returns.push_back(trace.discounted_return);
        if (k == 0)
            first = std::move(trace);
    }
    finish_solve(o, solved);
    const auto stats = mdp::summarize_returns(returns);
    const rover::RoverGridWorld env(doc.grid);
    std::string text = rover::render_ascii(env, first, o.shadow_time);
    text += "rollouts " + std::to_string(n) + " mean " + bench::format_number(stats.mean) + " std_error " +
            bench::format_number(stats.std_error) + '\n';
    emit(o, "simulate.txt", text);
    return 0;
}

int cmd_tradeoff(const Options& o) {
    const auto doc = rover::load_config(o.config);
    bench::ExperimentSpec spec = bench::parse_experiment(doc);
    if (o.n_sims)
        spec.n_sims = *o.n_sims;
    if (o.seed != 0)
        spec.base_seed = o.seed;
    const auto rows = bench::run_tradeoff(spec);
    const std::string format = o.format.empty() ? "csv" : o.format;
    if (format == "csv")
        emit(o, "tradeoff.csv", bench::results_csv(rows));
    else if (format == "json")
        emit(o, "tradeoff.json", bench::results_json(rows));
    else if (format == "svg")
        emit(o, "tradeoff.svg", bench::results_svg(rows));
    else
        throw ConfigError("tradeoff --format must be csv, json or svg");
    if (o.require_converged) {
        for (const auto& r : rows) {
            if (!r.converged)
                throw NotConverged("solver " + r.solver + " did not converge at cap " + std::to_string(r.iter_cap));
        }
    }
    return 0;
}

int cmd_sweep(const Options& o) {
    const auto doc = rover::load_config(o.config);
    bench::SweepSpec spec = bench::parse_sweep(doc.sweep);
    if (o.n_sims)
        spec.n_sims = *o.n_sims;
    if (o.seed != 0)
        spec.base_seed = o.seed;
    const auto rows = bench::run_complexity_sweep(spec, [](const bench::SweepRow& r) {
        std::cerr << "size " << r.size << ": reward ratio " << bench::format_number(r.reward_ratio)
                  << ", time ratio " << bench::format_number(r.time_ratio)
                  << (r.error.empty() ? "" : " (" + r.error + ")") << '\n';
    });
    const std::string format = o.format.empty() ? "csv" : o.format;
    if (format == "csv")
        emit(o, "sweep.csv", bench::sweep_csv(rows));
    else if (format == "json")
        emit(o, "sweep.json", bench::sweep_json(rows));
    else
        throw ConfigError("sweep --format must be csv or json");
    return 0;
}

int cmd_contingency(const Options& o) {
    const auto doc = rover::load_config(o.config);
    const bench::SolverKind kind = bench::parse_solver(o.solver);
    const auto heuristic = bench::parse_experiment(doc).heuristic;
    bench::ContingencyPlanner planner(doc.grid, kind, settings_of(o), heuristic);
    std::vector<rover::RoverState> states = parse_states(o.states);
    if (o.random_states > 0) {
        const auto extra = bench::random_off_nominal_states(planner.env(), o.random_states, o.seed);
        states.insert(states.end(), extra.begin(), extra.end());
    }
    if (states.empty())
        states.push_back(parse_state(o.start));
    bench::ContingencyReport report;
    report.solve_time_s = planner.solve_time();
    for (std::size_t k = 0; k < states.size(); ++k)
        report.entries.push_back(planner.query(states[k], o.seed + k));
    emit(o, "contingency.json", bench::contingency_json(planner.env(), report));
    return 0;
}

int cmd_render(const Options& o) {
    const auto doc = rover::load_config(o.config);
    SolvedPolicy solved = solve_with(o, doc);
    const mdp::Trace trace = rollout(solved, parse_state(o.start), o.seed);
    const rover::RoverGridWorld env(doc.grid);
    const std::string format = o.format.empty() ? "ascii" : o.format;
    if (format == "ascii")
        emit(o, "render.txt", rover::render_ascii(env, trace, o.shadow_time));
    else if (format == "svg")
        emit(o, "render.svg", rover::render_svg(env, trace, o.shadow_time));
    else
        throw ConfigError("render --format must be ascii or svg");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular MDP planning for rover traverses: flat and bi-level value iteration, "
                 "Q-learning and SARSA baselines, experiment harness"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Problem configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Base random seed");
        sub->add_option("--out", o.out, "Output directory (stdout when omitted)");
        sub->add_option("--format", o.format, "Output format: csv|json|svg (ascii|svg for render)");
        sub->add_option("--solver", o.solver, "vi|bl_vi|qlearning|sarsa");
        sub->add_option("--tol", o.tol, "Value-iteration tolerance");
        sub->add_option("--max-iters", o.max_iters, "Value-iteration sweep cap");
        sub->add_option("--n-sims", o.n_sims, "Number of evaluation rollouts");
        sub->add_flag("--require-converged", o.require_converged, "Exit with code 4 when a solver does not converge");
        sub->add_option("--start", o.start, "Start state x,y[,t]");
        sub->add_option("--episodes", o.episodes, "Training episodes for qlearning/sarsa");
        sub->add_option("--threads", o.threads, "Worker threads per value-iteration sweep");
        sub->add_option("--shadow-time", o.shadow_time, "Timestep of the shadow snapshot in renders");
    };

    std::vector<std::pair<CLI::App*, int (*)(const Options&)>> commands;
    commands.emplace_back(app.add_subcommand("solve", "Solve a problem and report convergence"), cmd_solve);
    commands.emplace_back(app.add_subcommand("simulate", "Roll out the solved policy"), cmd_simulate);
    commands.emplace_back(app.add_subcommand("tradeoff", "Compute-time vs. return experiment"), cmd_tradeoff);
    commands.emplace_back(app.add_subcommand("sweep", "Grid-size complexity sweep"), cmd_sweep);
    commands.emplace_back(app.add_subcommand("contingency", "Plan from off-nominal states"), cmd_contingency);
    commands.emplace_back(app.add_subcommand("render", "Render a rollout as text or SVG"), cmd_render);
    for (auto& [sub, fn] : commands)
        common(sub);
    commands[4].first->add_option("--states", o.states, "Semicolon-separated x,y[,t] states");
    commands[4].first->add_option("--random", o.random_states, "Add this many random off-nominal states");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        for (auto& [sub, fn] : commands) {
            if (sub->parsed())
                return fn(o);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NotConverged& e) {
        std::cerr << "not converged: " << e.what() << '\n';
        return kExitNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
