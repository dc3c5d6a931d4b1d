#include "roverplan/bench/emit.hpp"

#include "roverplan/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace roverplan::bench {

namespace {

using nlohmann::ordered_json;

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

ordered_json number_json(double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

std::string dump(const ordered_json& doc) {
    return doc.dump(2) + "\n";
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string results_csv(std::span<const ResultRow> rows) {
    std::string out = "solver,iter_cap,wall_time_s,mean_return,std_error,converged,seed\n";
    for (const ResultRow& r : rows) {
        out += r.solver + ',' + std::to_string(r.iter_cap) + ',' + format_number(r.wall_time_s) + ',' +
               format_number(r.mean_return) + ',' + format_number(r.std_error) + ',' +
               (r.converged ? "true" : "false") + ',' + std::to_string(r.seed) + '\n';
    }
    return out;
}

std::string results_json(std::span<const ResultRow> rows) {
    ordered_json doc = ordered_json::array();
    for (const ResultRow& r : rows) {
        ordered_json row;
        row["solver"] = r.solver;
        row["iter_cap"] = r.iter_cap;
        row["wall_time_s"] = number_json(r.wall_time_s);
        row["mean_return"] = number_json(r.mean_return);
        row["std_error"] = number_json(r.std_error);
        row["converged"] = r.converged;
        row["seed"] = r.seed;
        if (!r.error.empty())
            row["error"] = r.error;
        doc.push_back(row);
    }
    return dump(doc);
}

std::string results_svg(std::span<const ResultRow> rows) {
    constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 150, kTop = 20, kBottom = 50;
    std::map<std::string, std::vector<const ResultRow*>> series;
    std::vector<std::string> order;
    double tmin = INFINITY, tmax = -INFINITY, rmin = INFINITY, rmax = -INFINITY;
    for (const ResultRow& r : rows) {
        if (!r.error.empty() || !(r.wall_time_s > 0.0) || !std::isfinite(r.mean_return))
            continue;
        if (!series.count(r.solver))
            order.push_back(r.solver);
        series[r.solver].push_back(&r);
        tmin = std::min(tmin, r.wall_time_s);
        tmax = std::max(tmax, r.wall_time_s);
        rmin = std::min(rmin, r.mean_return - r.std_error);
        rmax = std::max(rmax, r.mean_return + r.std_error);
    }
    if (order.empty()) {
        tmin = 1e-3, tmax = 1.0, rmin = 0.0, rmax = 1.0;
    }
    double lmin = std::floor(std::log10(tmin));
    double lmax = std::ceil(std::log10(tmax));
    if (lmax <= lmin)
        lmax = lmin + 1;
    if (rmax <= rmin)
        rmax = rmin + 1;
    const double pad = 0.05 * (rmax - rmin);
    rmin -= pad;
    rmax += pad;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double t) { return kLeft + (std::log10(t) - lmin) / (lmax - lmin) * pw; };
    auto sy = [&](double r) { return kTop + (rmax - r) / (rmax - rmin) * ph; };
    auto f = [](double v) { return format_number(std::round(v * 100.0) / 100.0); };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(kWidth) + "\" height=\"" +
                      f(kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<rect x=\"" + f(kLeft) + "\" y=\"" + f(kTop) + "\" width=\"" + f(pw) + "\" height=\"" + f(ph) +
           "\" fill=\"none\" stroke=\"#000000\"/>\n";
    for (double e = lmin; e <= lmax; e += 1.0) {
        const double x = kLeft + (e - lmin) / (lmax - lmin) * pw;
        out += "<line x1=\"" + f(x) + "\" y1=\"" + f(kTop + ph) + "\" x2=\"" + f(x) + "\" y2=\"" +
               f(kTop + ph + 5) + "\" stroke=\"#000000\"/>\n";
        out += "<text x=\"" + f(x) + "\" y=\"" + f(kTop + ph + 18) + "\" text-anchor=\"middle\">1e" +
               format_number(e) + "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const double r = rmin + (rmax - rmin) * k / 4.0;
        out += "<text x=\"" + f(kLeft - 6) + "\" y=\"" + f(sy(r) + 4) + "\" text-anchor=\"end\">" + f(r) +
               "</text>\n";
    }
    out += "<text x=\"" + f(kLeft + pw / 2) + "\" y=\"" + f(kHeight - 10) +
           "\" text-anchor=\"middle\">wall time [s] (log scale)</text>\n";
    out += "<text x=\"15\" y=\"" + f(kTop + ph / 2) + "\" transform=\"rotate(-90 15 " + f(kTop + ph / 2) +
           ")\" text-anchor=\"middle\">mean discounted return</text>\n";

    for (std::size_t s = 0; s < order.size(); ++s) {
        auto points = series[order[s]];
        std::stable_sort(points.begin(), points.end(),
                         [](const ResultRow* a, const ResultRow* b) { return a->wall_time_s < b->wall_time_s; });
        const char* color = kPalette[s % kPalette.size()];
        std::string band, line;
        for (const ResultRow* p : points)
            band += f(sx(p->wall_time_s)) + "," + f(sy(p->mean_return + p->std_error)) + " ";
        for (auto it = points.rbegin(); it != points.rend(); ++it)
            band += f(sx((*it)->wall_time_s)) + "," + f(sy((*it)->mean_return - (*it)->std_error)) + " ";
        for (const ResultRow* p : points)
            line += f(sx(p->wall_time_s)) + "," + f(sy(p->mean_return)) + " ";
        band.pop_back();
        line.pop_back();
        out += "<polygon class=\"band\" points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.2\"/>\n";
        out += "<polyline class=\"series\" data-solver=\"" + order[s] + "\" points=\"" + line +
               "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        for (const ResultRow* p : points)
            out += "<circle cx=\"" + f(sx(p->wall_time_s)) + "\" cy=\"" + f(sy(p->mean_return)) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        const double ly = kTop + 14 + 18 * static_cast<double>(s);
        out += "<line x1=\"" + f(kWidth - kRight + 12) + "\" y1=\"" + f(ly - 4) + "\" x2=\"" +
               f(kWidth - kRight + 32) + "\" y2=\"" + f(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + f(kWidth - kRight + 38) + "\" y=\"" + f(ly) + "\">" + order[s] + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "size,flat_states,flat_mean_return,flat_std_error,bl_mean_return,bl_std_error,"
                      "reward_ratio,flat_wall_time_s,bl_wall_time_s,time_ratio,error\n";
    for (const SweepRow& r : rows) {
        std::string error = r.error;
        std::replace(error.begin(), error.end(), ',', ';');
        out += std::to_string(r.size) + ',' + std::to_string(r.flat_states) + ',' +
               format_number(r.flat_mean_return) + ',' + format_number(r.flat_std_error) + ',' +
               format_number(r.bl_mean_return) + ',' + format_number(r.bl_std_error) + ',' +
               format_number(r.reward_ratio) + ',' + format_number(r.flat_wall_time_s) + ',' +
               format_number(r.bl_wall_time_s) + ',' + format_number(r.time_ratio) + ',' + error + '\n';
    }
    return out;
}

std::string sweep_json(std::span<const SweepRow> rows) {
    ordered_json doc = ordered_json::array();
    for (const SweepRow& r : rows) {
        ordered_json row;
        row["size"] = r.size;
        row["flat_states"] = r.flat_states;
        row["flat_mean_return"] = number_json(r.flat_mean_return);
        row["flat_std_error"] = number_json(r.flat_std_error);
        row["bl_mean_return"] = number_json(r.bl_mean_return);
        row["bl_std_error"] = number_json(r.bl_std_error);
        row["reward_ratio"] = number_json(r.reward_ratio);
        row["flat_wall_time_s"] = number_json(r.flat_wall_time_s);
        row["bl_wall_time_s"] = number_json(r.bl_wall_time_s);
        row["time_ratio"] = number_json(r.time_ratio);
        if (!r.error.empty())
            row["error"] = r.error;
        doc.push_back(row);
    }
    return dump(doc);
}

std::string contingency_json(const rover::RoverGridWorld& env, const ContingencyReport& report) {
    ordered_json doc;
    doc["solve_time_s"] = report.solve_time_s;
    ordered_json entries = ordered_json::array();
    for (const ContingencyEntry& e : report.entries) {
        ordered_json entry;
        entry["state"] = {{"x", e.state.x}, {"y", e.state.y}, {"t", e.state.t},
                          {"measured", e.state.measured}, {"drilled", e.state.drilled},
                          {"visited", e.state.visited}};
        if (!e.error.empty()) {
            entry["error"] = e.error;
            entries.push_back(entry);
            continue;
        }
        entry["discounted_return"] = e.discounted_return;
        entry["latency_s"] = e.latency_s;
        entry["new_ll_solves"] = e.new_ll_solves;
        ordered_json steps = ordered_json::array();
        for (const auto& step : e.trace.steps) {
            const auto s = env.indexer().state_of(step.state);
            steps.push_back({{"x", s->x}, {"y", s->y}, {"t", s->t},
                             {"action", std::string(rover::action_name(step.action))},
                             {"reward", step.reward}});
        }
        entry["steps"] = steps;
        entries.push_back(entry);
    }
    doc["entries"] = entries;
    return dump(doc);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out)
        throw IoError("failed writing " + path.string());
}

} // namespace roverplan::bench
