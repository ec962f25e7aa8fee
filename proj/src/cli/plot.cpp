#include "kinetic/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace kinetic::cli {

namespace {

namespace fs = std::filesystem;

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const
    {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    }
};

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

Csv read_csv(const fs::path& path)
{
    std::ifstream in(path);
    Csv csv;
    std::string line;
    if (std::getline(in, line))
        csv.header = split(line);
    while (std::getline(in, line))
        if (!line.empty())
            csv.rows.push_back(split(line));
    return csv;
}

struct Point {
    double x, y;
    std::string sx, sy; // the CSV text, kept verbatim in the SVG
};

struct Series {
    std::string label;
    std::vector<Point> points;
};

struct PlotSpec {
    const char* file;
    const char* x;
    const char* y;
    const char* group; // empty: one series
    const char* title;
    const char* svg;
};

const PlotSpec kPlots[] = {
    {"h_trace.csv", "t", "H", "", "H(t)", "h_trace.svg"},
    {"trace.csv", "t", "H", "", "energy(t)", "energy.svg"},
    {"distance.csv", "t", "distance", "", "distance to uniform marginal", "distance.svg"},
    {"trend.csv", "t", "D", "rung", "D_k(t) by rung", "trend.svg"},
    {"control_trend.csv", "t", "D", "rung", "D_k(t) by rung, collisionless control", "control_trend.svg"},
};

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else if (c == '&')
            out += "&amp;";
        else if (c == '"')
            out += "&quot;";
        else
            out += c;
    }
    return out;
}

std::string render(const PlotSpec& spec, const std::vector<Series>& series)
{
    constexpr double W = 640, H = 400, ml = 80, mr = 130, mt = 40, mb = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
    if (!(x1 > x0))
        x1 = x0 + 1.0;
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::string o = fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
                                "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"12\">\n",
                                W, H, W, H);
    o += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
    o += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", W / 2,
                     escape(spec.title));
    o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", ml, mt,
                     W - ml - mr, H - mt - mb);
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        o += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", px(xv), H - mb + 16,
                         xv);
        o += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", ml - 6, py(yv) + 4, yv);
    }
    o += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (ml + W - mr) / 2, H - 10,
                     escape(spec.x));
    o += fmt::format("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
                     (mt + H - mb) / 2, (mt + H - mb) / 2, escape(spec.y));
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* col = colors[s % 6];
        std::string pts;
        for (const auto& p : series[s].points)
            pts += fmt::format("{:.2f},{:.2f} ", px(p.x), py(p.y));
        o += fmt::format("<g data-series=\"{}\">\n<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" "
                         "points=\"{}\"/>\n",
                         escape(series[s].label), col, pts);
        for (const auto& p : series[s].points)
            o += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2\" fill=\"{}\" data-x=\"{}\" data-y=\"{}\"/>\n",
                             px(p.x), py(p.y), col, escape(p.sx), escape(p.sy));
        o += "</g>\n";
        const double ly = mt + 14 + 18 * static_cast<double>(s);
        o += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                         W - mr + 10, ly, W - mr + 30, ly, col);
        o += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", W - mr + 35, ly + 4, escape(series[s].label));
    }
    o += "</svg>\n";
    return o;
}

} // namespace

PlotOutcome plot_directory(const fs::path& dir)
{
    PlotOutcome res;
    if (!fs::is_directory(dir)) {
        res.warnings.push_back(fmt::format("{} is not a directory", dir.string()));
        return res;
    }
    for (const auto& spec : kPlots) {
        const fs::path file = dir / spec.file;
        if (!fs::exists(file))
            continue;
        const Csv csv = read_csv(file);
        const int cx = csv.column(spec.x), cy = csv.column(spec.y);
        const int cg = *spec.group ? csv.column(spec.group) : -1;
        if (cx < 0 || cy < 0 || (*spec.group && cg < 0)) {
            res.warnings.push_back(fmt::format("{}: missing column, skipped", spec.file));
            continue;
        }
        std::map<std::string, Series> groups;
        std::vector<std::string> order;
        for (const auto& row : csv.rows) {
            const auto need = static_cast<std::size_t>(std::max({cx, cy, cg}));
            if (row.size() <= need)
                continue;
            const std::string key = cg >= 0 ? row[cg] : std::string(spec.y);
            if (!groups.count(key)) {
                order.push_back(key);
                groups[key].label = cg >= 0 ? std::string(spec.group) + " " + key : key;
            }
            try {
                groups[key].points.push_back({std::stod(row[cx]), std::stod(row[cy]), row[cx], row[cy]});
            } catch (const std::exception&) {
                // non-numeric cell: leave the point out
            }
        }
        std::vector<Series> series;
        for (const auto& k : order)
            if (!groups[k].points.empty())
                series.push_back(groups[k]);
        if (series.empty()) {
            res.warnings.push_back(fmt::format("{}: no data rows, skipped", spec.file));
            continue;
        }
        std::ofstream out(dir / spec.svg, std::ios::binary);
        out << render(spec, series);
        res.written.push_back(spec.svg);
    }
    if (res.written.empty())
        res.warnings.push_back(fmt::format("no plottable series in {}", dir.string()));
    return res;
}

} // namespace kinetic::cli
