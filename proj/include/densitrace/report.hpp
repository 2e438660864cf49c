#pragma once

#include "densitrace/density.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace densitrace {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

std::string to_hex(Rgb c);

/// Piecewise-linear color scale over evenly spaced stops, t in [0, 1].
class Palette {
public:
    explicit Palette(std::vector<Rgb> stops);
    /// #440154 #3b528b #21918c #5ec962 #fde725 (cold to warm).
    static Palette viridis5();

    Rgb at(double t) const;
    const std::vector<Rgb>& stops() const { return stops_; }

private:
    std::vector<Rgb> stops_;
};

struct ReportOptions {
    std::string title = "Computation density";
    std::string prefix_text;  // shown uncolored before the first record (e.g. the prompt)
    Palette palette = Palette::viridis5();
};

/// Position of `rho` on the palette after min/max normalization over the
/// document; 0.5 when every density is equal.
double normalized_density(double rho, double min_rho, double max_rho);

/// Self-contained XHTML page: one span per token colored by density, with
/// the numeric value as hover text and a legend. Throws InvalidArgument for
/// no records.
std::string render_html_report(const std::vector<TokenDensityRecord>& records, const ReportOptions& options = {});

std::string html_escape(const std::string& raw);

}  // namespace densitrace
