#include "roverplan/rover/render.hpp"

#include "roverplan/errors.hpp"

#include <charconv>
#include <string>

namespace roverplan::rover {

namespace {

std::string number(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

RoverState decode(const RoverGridWorld& env, StateIndex s) {
    const auto state = env.indexer().state_of(s);
    if (!state)
        throw ContractViolation("trace state " + std::to_string(s) + " does not decode to a rover state");
    return *state;
}

bool is_sink(const RoverGridWorld& env, StateIndex s) {
    return s == env.indexer().sink();
}

char target_glyph(const Target& t) {
    if (t.is_hibernation)
        return 'H';
    return t.id < 10 ? static_cast<char>('0' + t.id) : static_cast<char>('a' + (t.id - 10));
}

std::string state_text(const RoverState& s) {
    return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + ") t=" + std::to_string(s.t);
}

} // namespace

std::vector<Cell> trace_cells(const RoverGridWorld& env, const mdp::Trace& trace) {
    std::vector<Cell> cells;
    if (trace.steps.empty()) {
        if (!is_sink(env, trace.final_state))
            cells.push_back(decode(env, trace.final_state).cell());
        return cells;
    }
    cells.push_back(decode(env, trace.steps.front().state).cell());
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const StateIndex next =
            k + 1 < trace.steps.size() ? trace.steps[k + 1].state : trace.final_state;
        cells.push_back(is_sink(env, next) ? cells.back() : decode(env, next).cell());
    }
    return cells;
}

std::string render_ascii(const RoverGridWorld& env, const mdp::Trace& trace, int shadow_time) {
    const std::vector<Cell> path = trace_cells(env, trace);
    const int w = env.width();
    const int h = env.height();
    std::vector<std::string> rows(h, std::string(w, '.'));
    auto put = [&](Cell c, char glyph) { rows[h - c.y][c.x - 1] = glyph; };
    for (int x = 1; x <= w; ++x) {
        for (int y = 1; y <= h; ++y) {
            if (env.is_obstacle({x, y}))
                put({x, y}, '#');
            else if (env.is_shadowed({x, y}, shadow_time))
                put({x, y}, '~');
        }
    }
    for (Cell c : path)
        put(c, '*');
    for (const Target& t : env.config().targets)
        put(t.cell, target_glyph(t));

    std::string out;
    for (const std::string& row : rows)
        out += row + '\n';
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& step = trace.steps[k];
        out += "step " + std::to_string(k) + ": " + state_text(decode(env, step.state)) + " " +
               std::string(action_name(step.action)) + " reward " + number(step.reward) + '\n';
    }
    out += "return " + number(trace.discounted_return) + '\n';
    return out;
}

std::string render_svg(const RoverGridWorld& env, const mdp::Trace& trace, int shadow_time) {
    const std::vector<Cell> path = trace_cells(env, trace);
    const int w = env.width();
    const int h = env.height();
    const int size = kSvgCellSize;
    auto px = [&](Cell c) { return (c.x - 1) * size + size / 2; };
    auto py = [&](Cell c) { return (h - c.y) * size + size / 2; };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w * size) +
                      "\" height=\"" + std::to_string(h * size) + "\">\n";
    for (int x = 1; x <= w; ++x) {
        for (int y = 1; y <= h; ++y) {
            const char* fill = env.is_obstacle({x, y})            ? "#555555"
                               : env.is_shadowed({x, y}, shadow_time) ? "#b0b0c8"
                                                                      : "#f4ecd8";
            out += "<rect x=\"" + std::to_string((x - 1) * size) + "\" y=\"" +
                   std::to_string((h - y) * size) + "\" width=\"" + std::to_string(size) +
                   "\" height=\"" + std::to_string(size) + "\" fill=\"" + fill +
                   "\" stroke=\"#cccccc\"/>\n";
        }
    }
    for (const Target& t : env.config().targets) {
        out += "<circle class=\"target\" cx=\"" + std::to_string(px(t.cell)) + "\" cy=\"" +
               std::to_string(py(t.cell)) + "\" r=\"" + std::to_string(size / 3) + "\" fill=\"" +
               (t.is_hibernation ? "#3a7bd5" : "#d5683a") + "\"/>\n";
        out += "<text x=\"" + std::to_string(px(t.cell)) + "\" y=\"" + std::to_string(py(t.cell) + 5) +
               "\" text-anchor=\"middle\" font-size=\"14\">" + std::string(1, target_glyph(t)) +
               "</text>\n";
    }
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const Cell a = path[k];
        const Cell b = path[k + 1];
        out += "<line class=\"step\" x1=\"" + std::to_string(px(a)) + "\" y1=\"" +
               std::to_string(py(a)) + "\" x2=\"" + std::to_string(px(b)) + "\" y2=\"" +
               std::to_string(py(b)) + "\" stroke=\"#c00000\" stroke-width=\"3\"/>\n";
        out += "<text class=\"step-label\" x=\"" + std::to_string(px(a) + 4) + "\" y=\"" +
               std::to_string(py(a) - 4) + "\" font-size=\"10\">" + std::to_string(k) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace roverplan::rover
