#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "harness.hpp"

namespace sparse_bandit {

inline constexpr const char* kTracesHeader = "policy_label,seed,t,inst_regret,cum_regret,level";
inline constexpr const char* kAggregateHeader = "policy_label,t,mean,std,repetitions";
inline constexpr const char* kPlotHeader = "policy_label,t,mean,lower,upper";

/// Shortest text of `x` with 17 significant digits, enough for an exact round trip.
inline void append_double(std::string& out, double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

template <typename Int>
void append_int(std::string& out, Int x) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, res.ptr);
}

/// Trace rows without the header line.
inline void write_trace_rows(std::ostream& os, std::span<const RegretTrace> traces) {
    std::string line;
    for (const auto& tr : traces) {
        for (std::size_t t = 0; t < tr.length(); ++t) {
            line.clear();
            line += tr.label;
            line += ',';
            append_int(line, tr.seed);
            line += ',';
            append_int(line, t + 1);
            line += ',';
            append_double(line, tr.instantaneous[t]);
            line += ',';
            append_double(line, tr.cumulative[t]);
            line += ',';
            append_int(line, tr.levels[t]);
            line += '\n';
            os << line;
        }
    }
}

inline void write_traces_csv(std::ostream& os, std::span<const RegretTrace> traces) {
    os << kTracesHeader << '\n';
    write_trace_rows(os, traces);
}

inline void write_aggregate_csv(std::ostream& os, std::span<const AggregateResult> aggs) {
    os << kAggregateHeader << '\n';
    std::string line;
    for (const auto& a : aggs) {
        for (std::size_t t = 0; t < a.mean.size(); ++t) {
            line.clear();
            line += a.label;
            line += ',';
            append_int(line, t + 1);
            line += ',';
            append_double(line, a.mean[t]);
            line += ',';
            append_double(line, a.std[t]);
            line += ',';
            append_int(line, a.repetitions);
            line += '\n';
            os << line;
        }
    }
}

namespace io_detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, const char* name) {
    T value{};
    const char* end = field.data() + field.size();
    auto res = std::from_chars(field.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw ParseError(line_no, std::string("invalid ") + name + " '" + std::string(field) + "'");
    return value;
}

inline std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

}  // namespace io_detail

/// Parses a traces file. Rows of one (policy, seed) pair must be contiguous
/// with t running 1, 2, ...
inline std::vector<RegretTrace> read_traces_csv(std::istream& is) {
    using namespace io_detail;
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(is, line) || strip_cr(line) != kTracesHeader)
        throw ParseError(1, std::string("expected header '") + kTracesHeader + "'");
    std::vector<RegretTrace> out;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string_view row = strip_cr(line);
        if (row.empty()) continue;
        const auto f = split_csv(row);
        if (f.size() != 6) throw ParseError(line_no, "expected 6 fields, found " + std::to_string(f.size()));
        if (f[0].empty()) throw ParseError(line_no, "empty policy label");
        const auto seed = parse_number<std::uint64_t>(f[1], line_no, "seed");
        const auto t = parse_number<std::uint64_t>(f[2], line_no, "t");
        const auto inst = parse_number<double>(f[3], line_no, "inst_regret");
        const auto cum = parse_number<double>(f[4], line_no, "cum_regret");
        const auto level = parse_number<int>(f[5], line_no, "level");
        if (t == 1) {
            RegretTrace tr;
            tr.label = std::string(f[0]);
            tr.seed = seed;
            out.push_back(std::move(tr));
        } else if (out.empty() || out.back().label != f[0] || out.back().seed != seed ||
                   out.back().length() + 1 != t) {
            throw ParseError(line_no, "round index " + std::to_string(t) + " out of sequence");
        }
        auto& tr = out.back();
        tr.instantaneous.push_back(inst);
        tr.cumulative.push_back(cum);
        tr.levels.push_back(level);
    }
    return out;
}

inline std::vector<AggregateResult> read_aggregate_csv(std::istream& is) {
    using namespace io_detail;
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(is, line) || strip_cr(line) != kAggregateHeader)
        throw ParseError(1, std::string("expected header '") + kAggregateHeader + "'");
    std::vector<AggregateResult> out;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string_view row = strip_cr(line);
        if (row.empty()) continue;
        const auto f = split_csv(row);
        if (f.size() != 5) throw ParseError(line_no, "expected 5 fields, found " + std::to_string(f.size()));
        const auto t = parse_number<std::uint64_t>(f[1], line_no, "t");
        if (t == 1) {
            AggregateResult a;
            a.label = std::string(f[0]);
            a.repetitions = parse_number<std::size_t>(f[4], line_no, "repetitions");
            out.push_back(std::move(a));
        } else if (out.empty() || out.back().label != f[0] || out.back().mean.size() + 1 != t) {
            throw ParseError(line_no, "round index " + std::to_string(t) + " out of sequence");
        }
        out.back().mean.push_back(parse_number<double>(f[2], line_no, "mean"));
        out.back().std.push_back(parse_number<double>(f[3], line_no, "std"));
    }
    return out;
}

/// Aggregates per label, in order of first appearance.
inline std::vector<AggregateResult> aggregate_by_label(std::span<const RegretTrace> traces) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<RegretTrace>> groups;
    for (const auto& tr : traces) {
        auto [it, inserted] = groups.try_emplace(tr.label);
        if (inserted) order.push_back(tr.label);
        it->second.push_back(tr);
    }
    std::vector<AggregateResult> out;
    for (const auto& label : order) out.push_back(aggregate(std::span<const RegretTrace>(groups[label])));
    return out;
}

struct PlotRow {
    std::string label;
    std::size_t t = 0;
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Rows at t = stride, 2 stride, ... and always the final round.
inline std::vector<PlotRow> plot_rows(std::span<const AggregateResult> aggs, std::size_t stride) {
    if (stride == 0) throw InvalidInput("plotdata: stride must be positive");
    std::vector<PlotRow> rows;
    for (const auto& a : aggs) {
        const std::size_t len = a.mean.size();
        for (std::size_t t = 1; t <= len; ++t) {
            if (t % stride != 0 && t != len) continue;
            const double m = a.mean[t - 1];
            const double s = a.std[t - 1];
            rows.push_back({a.label, t, m, m - s, m + s});
        }
    }
    return rows;
}

inline void write_plot_csv(std::ostream& os, std::span<const PlotRow> rows) {
    os << kPlotHeader << '\n';
    std::string line;
    for (const auto& r : rows) {
        line.clear();
        line += r.label;
        line += ',';
        append_int(line, r.t);
        line += ',';
        append_double(line, r.mean);
        line += ',';
        append_double(line, r.lower);
        line += ',';
        append_double(line, r.upper);
        line += '\n';
        os << line;
    }
}

/// Standalone SVG with one curve per policy and a shaded +-1 std band.
inline void write_plot_svg(std::ostream& os, std::span<const PlotRow> rows, const std::string& title = "") {
    static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    constexpr double W = 720, H = 480, L = 70, R = 170, T = 40, B = 50;
    std::vector<std::string> labels;
    std::map<std::string, std::vector<const PlotRow*>> series;
    double t_max = 1, y_max = 0;
    for (const auto& r : rows) {
        auto [it, inserted] = series.try_emplace(r.label);
        if (inserted) labels.push_back(r.label);
        it->second.push_back(&r);
        t_max = std::max(t_max, static_cast<double>(r.t));
        y_max = std::max(y_max, r.upper);
    }
    if (y_max <= 0) y_max = 1;
    auto px = [&](double t) { return L + (W - L - R) * t / t_max; };
    auto py = [&](double y) { return H - B - (H - T - B) * std::max(0.0, y) / y_max; };
    auto num = [](double x) {
        std::string s;
        append_double(s, std::round(x * 100) / 100);
        return s;
    };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) os << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double tv = t_max * k / 4, yv = y_max * k / 4;
        os << "<text x=\"" << num(px(tv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(tv) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">t</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
       << ")\" text-anchor=\"middle\">cumulative regret</text>\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& pts = series[labels[i]];
        const char* color = palette[i % std::size(palette)];
        os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (const auto* p : pts) os << num(px(static_cast<double>(p->t))) << ',' << num(py(p->upper)) << ' ';
        for (auto it = pts.rbegin(); it != pts.rend(); ++it)
            os << num(px(static_cast<double>((*it)->t))) << ',' << num(py((*it)->lower)) << ' ';
        os << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto* p : pts) os << num(px(static_cast<double>(p->t))) << ',' << num(py(p->mean)) << ' ';
        os << "\"/>\n";
        const double ly = T + 16.0 * static_cast<double>(i);
        os << "<rect x=\"" << W - R + 10 << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"" << W - R + 28 << "\" y=\"" << ly + 10 << "\">" << labels[i] << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace sparse_bandit
