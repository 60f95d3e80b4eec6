#include "sset/render.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sset {

namespace {

constexpr int kCell = 20;        // square cell edge, px
constexpr int kMarginLeft = 96;  // room for signal names
constexpr int kMarginTop = 28;   // room for the title
constexpr int kMarginBottom = 24;
constexpr int kMarginRight = 12;

int channel(double score, int dark) {
    // White (255) to the dark endpoint, linear.
    return static_cast<int>(std::lround(255.0 + (dark - 255.0) * score));
}

// Minimal escaping for text nodes; ids and names are plain but defensive.
std::string escape_xml(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string heatmap_color(double score) {
    const double v = std::clamp(score, 0.0, 1.0);
    std::ostringstream out;
    out << "rgb(" << channel(v, 8) << ',' << channel(v, 48) << ',' << channel(v, 107) << ')';
    return out.str();
}

std::string render_heatmap_svg(const ImportanceMatrix& importance,
                               const std::vector<std::string>& signal_names,
                               const std::string& title) {
    if (importance.steps < 1 || importance.signals < 1) {
        throw std::invalid_argument("heatmap requires a non-empty importance matrix");
    }
    if (signal_names.size() != static_cast<std::size_t>(importance.signals)) {
        throw std::invalid_argument("heatmap needs one name per signal");
    }

    const int width = kMarginLeft + importance.steps * kCell + kMarginRight;
    const int height = kMarginTop + importance.signals * kCell + kMarginBottom;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    if (!title.empty()) {
        svg << "  <text x=\"" << kMarginLeft << "\" y=\"18\" font-family=\"monospace\" "
            << "font-size=\"13\">" << escape_xml(title) << "</text>\n";
    }
    for (int s = 0; s < importance.signals; ++s) {
        const int y = kMarginTop + s * kCell;
        svg << "  <text x=\"" << (kMarginLeft - 6) << "\" y=\"" << (y + kCell / 2 + 4)
            << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">"
            << escape_xml(signal_names[static_cast<std::size_t>(s)]) << "</text>\n";
        for (int t = 0; t < importance.steps; ++t) {
            svg << "  <rect x=\"" << (kMarginLeft + t * kCell) << "\" y=\"" << y << "\" width=\""
                << kCell << "\" height=\"" << kCell << "\" fill=\""
                << heatmap_color(importance.at(t, s)) << "\" stroke=\"rgb(220,220,220)\"/>\n";
        }
    }
    for (int t = 0; t < importance.steps; t += 5) {
        svg << "  <text x=\"" << (kMarginLeft + t * kCell + kCell / 2) << "\" y=\""
            << (kMarginTop + importance.signals * kCell + 16)
            << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">" << t
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace sset
