#include "aed/svg.hpp"

#include "aed/common.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <ostream>

namespace aed {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 160.0;  // legend
constexpr double kTop = 40.0;
constexpr double kBottom = 52.0;

constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string fixed(double v, int digits = 1) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
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

void write_line_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<LineSeries>& series) {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_max = 1.0;
    bool first = true;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_min = first ? s.x[i] : std::min(x_min, s.x[i]);
            x_max = first ? s.x[i] : std::max(x_max, s.x[i]);
            y_max = first ? s.y[i] : std::max(y_max, s.y[i]);
            first = false;
        }
    }
    if (!(x_max > x_min)) {
        x_max = x_min + 1.0;
    }
    if (!(y_max > 0.0)) {
        y_max = 1.0;
    }
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kTop + plot_h - y / y_max * plot_h; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << py(0)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << py(0)
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x_min + (x_max - x_min) * t / 4.0;
        const double fy = y_max * t / 4.0;
        out << "<text x=\"" << fixed(px(fx)) << "\" y=\"" << fixed(py(0) + 16) << "\" text-anchor=\"middle\">"
            << format_double(fx) << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(py(fy) + 4) << "\" text-anchor=\"end\">"
            << fixed(fy, 2) << "</text>\n";
    }
    out << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << fixed(kTop + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % kColors.size()];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
        // Long curves are thinned to about 1000 points.
        const std::size_t step = std::max<std::size_t>(1, s.x.size() / 1000);
        for (std::size_t i = 0; i < s.x.size(); i += step) {
            out << fixed(px(s.x[i]), 2) << ',' << fixed(py(s.y[i]), 2) << ' ';
        }
        if (!s.x.empty() && (s.x.size() - 1) % step != 0) {
            out << fixed(px(s.x.back()), 2) << ',' << fixed(py(s.y.back()), 2);
        }
        out << "\"/>\n";
        const double ly = kTop + 16.0 * static_cast<double>(k);
        out << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 32
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
            << "/>\n";
        out << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label)
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace aed
