#include "roverplan/bench/spec_io.hpp"

#include "roverplan/errors.hpp"

#include <algorithm>
#include <initializer_list>
#include <string_view>

namespace roverplan::bench {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object())
        throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown field '" + key + "' in " + std::string(where));
    }
}

template <class T>
void read(const json& obj, const char* key, std::string_view where, T& target) {
    const auto it = obj.find(key);
    if (it == obj.end())
        return;
    try {
        target = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + std::string(key) + "' in " + std::string(where) + " has the wrong type");
    }
}

RoverState read_state(const json& value) {
    if (!value.is_array() || value.size() < 2 || value.size() > 3)
        throw ConfigError("start states must be [x, y] or [x, y, t]");
    RoverState s;
    try {
        s.x = value[0].get<int>();
        s.y = value[1].get<int>();
        s.t = value.size() == 3 ? value[2].get<int>() : 0;
    } catch (const json::exception&) {
        throw ConfigError("start state coordinates must be integers");
    }
    return s;
}

} // namespace

bilevel::HeuristicSpec parse_heuristic(const json& section) {
    bilevel::HeuristicSpec h;
    if (section.is_null())
        return h;
    constexpr std::string_view where = "heuristic";
    reject_unknown(section, where, {"mode", "speed_slack", "activity_time_estimate", "obstacle_threshold"});
    std::string mode = "coarse";
    read(section, "mode", where, mode);
    if (mode == "coarse")
        h.mode = bilevel::HeuristicMode::coarse;
    else if (mode == "exact")
        h.mode = bilevel::HeuristicMode::exact;
    else
        throw ConfigError("heuristic mode must be 'coarse' or 'exact'");
    read(section, "speed_slack", where, h.speed_slack);
    read(section, "activity_time_estimate", where, h.activity_time_estimate);
    read(section, "obstacle_threshold", where, h.obstacle_threshold);
    h.validate();
    return h;
}

ExperimentSpec parse_experiment(const rover::ConfigDocument& doc) {
    ExperimentSpec spec;
    spec.problem = doc.grid;
    const json& e = doc.experiment;
    if (e.is_null())
        return spec;
    constexpr std::string_view where = "experiment";
    reject_unknown(e, where,
                   {"solvers", "max_iter_grid", "episode_grid", "n_sims", "base_seed", "start_states",
                    "tolerance", "heuristic", "learning", "warm_up", "timing"});
    if (const auto it = e.find("solvers"); it != e.end()) {
        std::vector<std::string> tags;
        read(e, "solvers", where, tags);
        spec.solvers.clear();
        for (const auto& tag : tags)
            spec.solvers.push_back(parse_solver(tag));
    }
    read(e, "max_iter_grid", where, spec.max_iter_grid);
    read(e, "episode_grid", where, spec.episode_grid);
    read(e, "n_sims", where, spec.n_sims);
    read(e, "base_seed", where, spec.base_seed);
    read(e, "tolerance", where, spec.tolerance);
    read(e, "warm_up", where, spec.warm_up);
    read(e, "timing", where, spec.timing);
    if (const auto it = e.find("heuristic"); it != e.end())
        spec.heuristic = parse_heuristic(*it);
    if (const auto it = e.find("start_states"); it != e.end()) {
        if (it->is_string()) {
            if (it->get<std::string>() != "all")
                throw ConfigError("start_states must be \"all\", a list of states, or {\"random\": n}");
            spec.start.kind = StartSelection::Kind::all;
        } else if (it->is_object()) {
            reject_unknown(*it, "start_states", {"random"});
            spec.start.kind = StartSelection::Kind::random_sample;
            read(*it, "random", "start_states", spec.start.sample_count);
        } else if (it->is_array()) {
            spec.start.states.clear();
            for (const json& s : *it)
                spec.start.states.push_back(read_state(s));
        } else {
            throw ConfigError("start_states must be \"all\", a list of states, or {\"random\": n}");
        }
    }
    if (const auto it = e.find("learning"); it != e.end()) {
        constexpr std::string_view lw = "experiment.learning";
        reject_unknown(*it, lw, {"learning_rate", "epsilon", "epsilon_decay", "initial_q", "step_cap"});
        read(*it, "learning_rate", lw, spec.learning.learning_rate);
        read(*it, "epsilon", lw, spec.learning.epsilon);
        read(*it, "epsilon_decay", lw, spec.learning.epsilon_decay);
        read(*it, "initial_q", lw, spec.learning.initial_q);
        read(*it, "step_cap", lw, spec.learning.step_cap);
        spec.learning.validate();
    }
    spec.validate();
    return spec;
}

SweepSpec parse_sweep(const json& section) {
    SweepSpec spec;
    if (section.is_null())
        return spec;
    constexpr std::string_view where = "sweep";
    reject_unknown(section, where,
                   {"grid_sizes", "science_targets", "hibernation", "horizon_factor", "obstacle_fraction",
                    "shadow_velocity", "shadow_width", "discount", "activity_durations", "base_seed",
                    "n_sims", "tolerance", "heuristic", "max_flat_states", "timing"});
    read(section, "grid_sizes", where, spec.grid_sizes);
    read(section, "science_targets", where, spec.science_targets);
    read(section, "hibernation", where, spec.hibernation);
    read(section, "horizon_factor", where, spec.horizon_factor);
    read(section, "obstacle_fraction", where, spec.obstacle_fraction);
    read(section, "shadow_velocity", where, spec.shadow_velocity);
    read(section, "shadow_width", where, spec.shadow_width);
    read(section, "discount", where, spec.discount);
    read(section, "activity_durations", where, spec.activity_durations);
    read(section, "base_seed", where, spec.base_seed);
    read(section, "n_sims", where, spec.n_sims);
    read(section, "tolerance", where, spec.tolerance);
    read(section, "max_flat_states", where, spec.max_flat_states);
    read(section, "timing", where, spec.timing);
    if (const auto it = section.find("heuristic"); it != section.end())
        spec.heuristic = parse_heuristic(*it);
    spec.validate();
    return spec;
}

} // namespace roverplan::bench
