#include "densitrace/report.hpp"

#include "densitrace/errors.hpp"
#include "densitrace/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace densitrace {

std::string to_hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

Palette::Palette(std::vector<Rgb> stops) : stops_(std::move(stops)) {
    if (stops_.size() < 2) fail(ErrorKind::InvalidArgument, "a palette needs at least two stops");
}

Palette Palette::viridis5() {
    return Palette({{0x44, 0x01, 0x54}, {0x3b, 0x52, 0x8b}, {0x21, 0x91, 0x8c}, {0x5e, 0xc9, 0x62}, {0xfd, 0xe7, 0x25}});
}

Rgb Palette::at(double t) const {
    t = std::clamp(std::isnan(t) ? 0.5 : t, 0.0, 1.0);
    const double pos = t * static_cast<double>(stops_.size() - 1);
    const auto k = std::min(static_cast<std::size_t>(pos), stops_.size() - 2);
    const double f = pos - static_cast<double>(k);
    auto mix = [f](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * f));
    };
    const Rgb& a = stops_[k];
    const Rgb& b = stops_[k + 1];
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

double normalized_density(double rho, double min_rho, double max_rho) {
    if (!(max_rho > min_rho)) return 0.5;
    return std::clamp((rho - min_rho) / (max_rho - min_rho), 0.0, 1.0);
}

std::string html_escape(const std::string& raw) {
    // Invalid UTF-8 (token pieces can split a character) becomes U+FFFD.
    std::string out;
    for (std::size_t pos = 0; pos < raw.size();) {
        const auto begin = pos;
        const auto cp = utf8::next(raw, pos);
        if (cp < 0) {
            out += "\xEF\xBF\xBD";
            continue;
        }
        switch (cp) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default:
                // Control characters other than tab/newline are not allowed in XML.
                if (cp < 0x20 && cp != '\t' && cp != '\n' && cp != '\r')
                    out += "\xEF\xBF\xBD";
                else
                    out.append(raw, begin, pos - begin);
        }
    }
    return out;
}

namespace {

// Dark text on the bright end of the scale, light text on the dark end.
const char* text_color(Rgb c) {
    const double luma = 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b;
    return luma > 140.0 ? "#000000" : "#ffffff";
}

}  // namespace

std::string render_html_report(const std::vector<TokenDensityRecord>& records, const ReportOptions& options) {
    if (records.empty()) fail(ErrorKind::InvalidArgument, "report needs at least one token record");
    const auto [lo_it, hi_it] = std::minmax_element(records.begin(), records.end(),
                                                    [](const auto& a, const auto& b) { return a.rho_hat < b.rho_hat; });
    const double lo = lo_it->rho_hat;
    const double hi = hi_it->rho_hat;

    std::string html;
    html += "<!DOCTYPE html>\n<html xmlns=\"http://www.w3.org/1999/xhtml\" lang=\"en\">\n<head>\n";
    html += "<meta charset=\"utf-8\" />\n<title>" + html_escape(options.title) + "</title>\n";
    html += "<style>\n"
            "body { font-family: sans-serif; max-width: 60em; margin: 2em auto; }\n"
            ".text { font-family: monospace; white-space: pre-wrap; line-height: 1.8; }\n"
            ".tok { padding: 0.1em 0; border-radius: 2px; }\n"
            ".prefix { color: #555555; }\n"
            ".legend { display: flex; gap: 0; margin-top: 1.5em; }\n"
            ".legend span { flex: 1; padding: 0.3em; text-align: center; font-size: 0.8em; }\n"
            "</style>\n</head>\n<body>\n";
    html += "<h1>" + html_escape(options.title) + "</h1>\n<div class=\"text\">";
    if (!options.prefix_text.empty()) html += "<span class=\"prefix\">" + html_escape(options.prefix_text) + "</span>";
    for (const auto& r : records) {
        const Rgb c = options.palette.at(normalized_density(r.rho_hat, lo, hi));
        html += "<span class=\"tok\" style=\"background-color: " + to_hex(c) + "; color: " + text_color(c) +
                "\" title=\"rho_hat=" + format_double(r.rho_hat) + " pos=" + std::to_string(r.position) + "\">" +
                html_escape(r.text) + "</span>";
    }
    html += "</div>\n<div class=\"legend\">";
    const auto& stops = options.palette.stops();
    for (std::size_t k = 0; k < stops.size(); ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(stops.size() - 1);
        const double value = hi > lo ? lo + t * (hi - lo) : lo;
        html += "<span style=\"background-color: " + to_hex(stops[k]) + "; color: " + text_color(stops[k]) + "\">" +
                format_double(std::round(value * 1e4) / 1e4) + "</span>";
    }
    html += "</div>\n<p>Token color encodes the computation density (rho_hat), min/max normalized over this document: "
            "cold = sparse, warm = dense.</p>\n</body>\n</html>\n";
    return html;
}

}  // namespace densitrace
