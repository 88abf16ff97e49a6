#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace qcm::cli {

namespace {

constexpr double kWidth = 640, kHeight = 360;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 6> kColours = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string renderSvg(const Chart& chart) {
    double lo = 0.0, hi = 0.0;
    for (const auto& s : chart.series)
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double plotW = kWidth - kLeft - kRight, plotH = kHeight - kTop - kBottom;
    auto y = [&](double v) { return kTop + (hi - v) / (hi - lo) * plotH; };
    const std::size_t nCat = std::max<std::size_t>(chart.categories.size(), 1);
    const double slot = plotW / static_cast<double>(nCat);

    std::size_t bars = 0;
    for (const auto& s : chart.series) bars += !s.line;
    const double barW = bars ? slot * 0.8 / static_cast<double>(bars) : 0.0;

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
        kWidth, kHeight, kWidth, kHeight);
    out += fmt::format("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out += fmt::format("<text x=\"{:.2f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                       kWidth / 2, escape(chart.title));
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n", kLeft,
                       y(0.0), kLeft + plotW);
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", kLeft,
                       kTop, kTop + plotH);
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.3f}</text>\n",
                           kLeft - 4, y(v) + 3, v);
    }
    for (std::size_t c = 0; c < chart.categories.size(); ++c)
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                           kLeft + slot * (c + 0.5), kTop + plotH + 14, escape(chart.categories[c]));

    std::size_t barIndex = 0;
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const auto& series = chart.series[s];
        const char* colour = kColours[s % kColours.size()];
        if (series.line) {
            std::string points;
            for (std::size_t c = 0; c < series.values.size(); ++c)
                points += fmt::format("{}{:.2f},{:.2f}", c ? " " : "", kLeft + slot * (c + 0.5), y(series.values[c]));
            out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", points, colour);
        } else {
            for (std::size_t c = 0; c < series.values.size(); ++c) {
                const double x = kLeft + slot * c + slot * 0.1 + barW * barIndex;
                const double top = std::min(y(series.values[c]), y(0.0));
                const double h = std::abs(y(series.values[c]) - y(0.0));
                out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x,
                                   top, barW, h, colour);
            }
            ++barIndex;
        }
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{}\">{}</text>\n",
                           kLeft + 120.0 * s, kHeight - 16, colour, escape(series.name));
    }
    out += "</svg>\n";
    return out;
}

}  // namespace qcm::cli
