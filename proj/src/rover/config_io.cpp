#include "roverplan/rover/config_io.hpp"

#include "roverplan/errors.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

namespace roverplan::rover {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object())
        throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (std::string_view a : allowed)
            known = known || key == a;
        if (!known)
            throw ConfigError("unknown field '" + key + "' in " + std::string(where));
    }
}

template <class T>
T read(const json& obj, const char* key, std::string_view where, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end())
        return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + std::string(key) + "' in " + std::string(where) +
                          " has the wrong type");
    }
}

template <class T>
T require(const json& obj, const char* key, std::string_view where) {
    if (!obj.contains(key))
        throw ConfigError("missing required field '" + std::string(key) + "' in " +
                          std::string(where));
    return read<T>(obj, key, where, T{});
}

Cell read_cell(const json& value, std::string_view where) {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
        !value[1].is_number_integer())
        throw ConfigError(std::string(where) + " must be an [x, y] integer pair");
    return {value[0].get<int>(), value[1].get<int>()};
}

std::vector<Cell> read_cells(const json& obj, const char* key, std::string_view where) {
    std::vector<Cell> cells;
    const auto it = obj.find(key);
    if (it == obj.end())
        return cells;
    if (!it->is_array())
        throw ConfigError("field '" + std::string(key) + "' in " + std::string(where) +
                          " must be an array of cells");
    for (const json& c : *it)
        cells.push_back(read_cell(c, where));
    return cells;
}

json cells_json(const std::vector<Cell>& cells) {
    json out = json::array();
    for (Cell c : cells)
        out.push_back({c.x, c.y});
    return out;
}

Target read_target(const json& obj, TargetId id, int horizon) {
    const std::string where = "targets[" + std::to_string(id) + "]";
    reject_unknown(obj, where, {"cell", "measure_reward", "drill_reward", "window", "hibernation"});
    Target tgt;
    tgt.id = id;
    if (!obj.contains("cell"))
        throw ConfigError("missing required field 'cell' in " + where);
    tgt.cell = read_cell(obj["cell"], where + ".cell");
    tgt.is_hibernation = read<bool>(obj, "hibernation", where, false);
    tgt.measure_reward = read<double>(obj, "measure_reward", where,
                                      tgt.is_hibernation ? 0.0 : kDefaultMeasureReward);
    tgt.drill_reward = read<double>(obj, "drill_reward", where,
                                    tgt.is_hibernation ? kDefaultHibernationReward
                                                       : kDefaultDrillReward);
    tgt.window = {0, horizon};
    if (const auto it = obj.find("window"); it != obj.end()) {
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
            !(*it)[1].is_number_integer())
            throw ConfigError(where + ".window must be an [open, close] integer pair");
        tgt.window = {(*it)[0].get<int>(), (*it)[1].get<int>()};
    }
    return tgt;
}

} // namespace

GridConfig parse_grid_config(const json& doc) {
    return parse_config(doc).grid;
}

ConfigDocument parse_config(const json& doc) {
    constexpr std::string_view where = "configuration";
    reject_unknown(doc, where,
                   {"schema_version", "width", "height", "horizon", "discount", "simplified",
                    "end_penalty", "activity_durations", "targets", "obstacles", "shadows",
                    "experiment", "sweep"});
    const int version = require<int>(doc, "schema_version", where);
    if (version != kConfigSchemaVersion)
        throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                          std::to_string(kConfigSchemaVersion) + ")");

    ConfigDocument out;
    GridConfig& cfg = out.grid;
    cfg.width = require<int>(doc, "width", where);
    cfg.height = require<int>(doc, "height", where);
    cfg.horizon = require<int>(doc, "horizon", where);
    cfg.discount = read<double>(doc, "discount", where, cfg.discount);
    cfg.simplified = read<bool>(doc, "simplified", where, cfg.simplified);
    cfg.end_penalty = read<double>(doc, "end_penalty", where, cfg.end_penalty);
    if (const auto it = doc.find("activity_durations"); it != doc.end()) {
        const auto weights = read<std::vector<double>>(doc, "activity_durations", where, {});
        if (weights.size() != 3)
            throw ConfigError("activity_durations must list weights for durations 1, 2 and 3");
        std::copy(weights.begin(), weights.end(), cfg.activity_durations.begin());
    }

    if (const auto it = doc.find("targets"); it != doc.end()) {
        if (!it->is_array())
            throw ConfigError("targets must be an array");
        for (const json& t : *it)
            cfg.targets.push_back(read_target(t, static_cast<TargetId>(cfg.targets.size()), cfg.horizon));
    }

    if (const auto it = doc.find("obstacles"); it != doc.end()) {
        reject_unknown(*it, "obstacles", {"penalty", "cells"});
        cfg.shadows.obstacle_penalty = read<double>(*it, "penalty", "obstacles", cfg.shadows.obstacle_penalty);
        cfg.shadows.obstacles = read_cells(*it, "cells", "obstacles");
    }

    if (const auto it = doc.find("shadows"); it != doc.end()) {
        reject_unknown(*it, "shadows", {"penalty", "sweep", "overrides"});
        cfg.shadows.shadow_penalty = read<double>(*it, "penalty", "shadows", cfg.shadows.shadow_penalty);
        if (const auto sw = it->find("sweep"); sw != it->end() && !sw->is_null()) {
            reject_unknown(*sw, "shadows.sweep", {"start_column", "velocity", "width"});
            ShadowSweep sweep;
            sweep.start_column = read<double>(*sw, "start_column", "shadows.sweep", sweep.start_column);
            sweep.velocity = read<double>(*sw, "velocity", "shadows.sweep", sweep.velocity);
            sweep.width = read<int>(*sw, "width", "shadows.sweep", sweep.width);
            cfg.shadows.sweep = sweep;
        }
        if (const auto ov = it->find("overrides"); ov != it->end()) {
            if (!ov->is_array())
                throw ConfigError("shadows.overrides must be an array");
            for (const json& o : *ov) {
                reject_unknown(o, "shadows.overrides[]", {"t", "cells"});
                cfg.shadows.overrides.push_back(
                    {require<int>(o, "t", "shadows.overrides[]"), read_cells(o, "cells", "shadows.overrides[]")});
            }
        }
    }

    cfg.validate();
    if (const auto it = doc.find("experiment"); it != doc.end())
        out.experiment = *it;
    if (const auto it = doc.find("sweep"); it != doc.end())
        out.sweep = *it;
    return out;
}

ConfigDocument load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open configuration file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const GridConfig& cfg) {
    json doc;
    doc["schema_version"] = kConfigSchemaVersion;
    doc["width"] = cfg.width;
    doc["height"] = cfg.height;
    doc["horizon"] = cfg.horizon;
    doc["discount"] = cfg.discount;
    doc["simplified"] = cfg.simplified;
    doc["end_penalty"] = cfg.end_penalty;
    doc["activity_durations"] = cfg.activity_durations;
    json targets = json::array();
    for (const Target& t : cfg.targets) {
        targets.push_back({{"cell", {t.cell.x, t.cell.y}},
                           {"measure_reward", t.measure_reward},
                           {"drill_reward", t.drill_reward},
                           {"window", {t.window.open, t.window.close}},
                           {"hibernation", t.is_hibernation}});
    }
    doc["targets"] = targets;
    doc["obstacles"] = {{"penalty", cfg.shadows.obstacle_penalty},
                        {"cells", cells_json(cfg.shadows.obstacles)}};
    json shadows = {{"penalty", cfg.shadows.shadow_penalty}};
    if (cfg.shadows.sweep) {
        shadows["sweep"] = {{"start_column", cfg.shadows.sweep->start_column},
                            {"velocity", cfg.shadows.sweep->velocity},
                            {"width", cfg.shadows.sweep->width}};
    }
    json overrides = json::array();
    for (const ShadowOverride& o : cfg.shadows.overrides)
        overrides.push_back({{"t", o.t}, {"cells", cells_json(o.cells)}});
    shadows["overrides"] = overrides;
    doc["shadows"] = shadows;
    return doc;
}

} // namespace roverplan::rover
