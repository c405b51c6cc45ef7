#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "qsparse/error.hpp"
#include "qsparse/experiment.hpp"

namespace qsparse {

namespace {

constexpr const char* kReportVersion = "# qsparse-report v1";
constexpr const char* kReportHeader =
    "rep,loss,oracle_rate,raw_radius,covered,selected_size,oracle_size,true_size,t_star,rejections";
constexpr const char* kSweepVersion = "# qsparse-sweep v1";
constexpr const char* kSweepHeader = "s,median_loss,benchmark,ratio";

// %.17g round-trips every finite double.
std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidInput("malformed number '" + s + "' in report");
    return v;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<ReplicationRow>& rows) {
    out << kReportVersion << '\n' << kReportHeader << '\n';
    for (const auto& r : rows) {
        out << r.rep << ',' << fmt_double(r.loss) << ',' << fmt_double(r.oracle_rate) << ','
            << fmt_double(r.raw_radius) << ',' << (r.covered ? 1 : 0) << ',' << r.selected_size << ','
            << r.oracle_size << ',' << r.true_size << ',' << fmt_double(r.t_star) << ',' << r.rejections
            << '\n';
    }
}

std::vector<ReplicationRow> read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kReportVersion)
        throw InvalidInput("report does not start with '" + std::string(kReportVersion) + "'");
    if (!std::getline(in, line) || line != kReportHeader)
        throw InvalidInput("unexpected report header row");
    std::vector<ReplicationRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 10) throw InvalidInput("report row has " + std::to_string(f.size()) + " fields");
        ReplicationRow r;
        r.rep = std::stoull(f[0]);
        r.loss = parse_double(f[1]);
        r.oracle_rate = parse_double(f[2]);
        r.raw_radius = parse_double(f[3]);
        r.covered = f[4] == "1";
        r.selected_size = std::stoull(f[5]);
        r.oracle_size = std::stoull(f[6]);
        r.true_size = std::stoull(f[7]);
        r.t_star = parse_double(f[8]);
        r.rejections = std::stoull(f[9]);
        rows.push_back(r);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << kSweepVersion << '\n' << kSweepHeader << '\n';
    for (const auto& r : rows)
        out << r.s << ',' << fmt_double(r.median_loss) << ',' << fmt_double(r.benchmark) << ','
            << fmt_double(r.ratio) << '\n';
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<ChartSeries>& series) {
    constexpr double W = 640, H = 400, left = 70, right = 20, top = 40, bottom = 60;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
        for (double v : s.y)
            if (std::isfinite(v)) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
    if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
    ymin = std::min(ymin, 0.0);
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
    auto py = [&](double y) { return H - bottom - (y - ymin) / (ymax - ymin) * (H - top - bottom); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape_xml(title) << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\""
        << H - bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 4.0;
        const double yv = ymin + (ymax - ymin) * k / 4.0;
        svg << "<text x=\"" << px(xv) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">"
            << fmt_double(std::round(xv * 1000) / 1000) << "</text>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
            << fmt_double(std::round(yv * 1000) / 1000) << "</text>\n";
    }
    svg << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
        << escape_xml(x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << (top + H - bottom) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % 5];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (std::isfinite(s.y[i])) svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        svg << "\"/>\n";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (std::isfinite(s.y[i]))
                svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\""
                    << color << "\"/>\n";
        svg << "<text x=\"" << W - right - 150 << "\" y=\"" << top + 16 * (k + 1) << "\" fill=\"" << color
            << "\">" << escape_xml(s.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace qsparse
