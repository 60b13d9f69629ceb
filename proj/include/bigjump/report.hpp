#pragma once

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "bigjump/errors.hpp"

namespace bigjump {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// CSV writer with provenance comment lines. Replays are byte-identical except
// the generated= line.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw Error("cannot open output file: " + path);
    }

    void provenance(const std::string& key, const std::string& value) { out_ << "# " << key << "=" << value << "\n"; }

    void timestamp() {
        std::time_t t = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        out_ << "# generated=" << buf << "\n";
    }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

// Minimal SVG: empirical CDF of the sample (steps drawn as a polyline)
// overlaid with a reference curve, no plotting dependencies.
inline void svg_ecdf_overlay(const std::string& path, std::vector<double> sample,
                             const std::function<double(double)>& ref_cdf, const std::string& title) {
    if (sample.empty()) throw EmptySample("svg_ecdf_overlay: empty sample");
    std::sort(sample.begin(), sample.end());
    double lo = sample.front(), hi = sample.back();
    if (hi <= lo) hi = lo + 1.0;
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const double W = 640, H = 420, ml = 50, mr = 15, mt = 30, mb = 35;
    auto sx = [&](double v) { return ml + (v - lo) / (hi - lo) * (W - ml - mr); };
    auto sy = [&](double p) { return H - mb - p * (H - mt - mb); };

    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='18' text-anchor='middle' font-size='13'>" << title << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << sy(0) << "' x2='" << W - mr << "' y2='" << sy(0)
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << sy(0) << "' x2='" << ml << "' y2='" << sy(1) << "' stroke='black'/>\n";
    for (double p : {0.0, 0.5, 1.0})
        out << "<text x='" << ml - 6 << "' y='" << sy(p) + 4 << "' text-anchor='end' font-size='10'>" << p
            << "</text>\n";
    for (double q : {0.0, 0.5, 1.0}) {
        double v = lo + q * (hi - lo);
        out << "<text x='" << sx(v) << "' y='" << H - mb + 14 << "' text-anchor='middle' font-size='10'>"
            << fmt_num(v) << "</text>\n";
    }

    const double n = static_cast<double>(sample.size());
    out << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
    std::size_t step = std::max<std::size_t>(1, sample.size() / 512);
    for (std::size_t i = 0; i < sample.size(); i += step)
        out << sx(sample[i]) << "," << sy(static_cast<double>(i + 1) / n) << " ";
    out << sx(sample.back()) << "," << sy(1.0) << "'/>\n";

    out << "<polyline fill='none' stroke='crimson' stroke-width='1.2' stroke-dasharray='5,3' points='";
    for (int i = 0; i <= 256; ++i) {
        double v = lo + (hi - lo) * i / 256.0;
        out << sx(v) << "," << sy(std::clamp(ref_cdf(v), 0.0, 1.0)) << " ";
    }
    out << "'/>\n";
    out << "<text x='" << W - mr - 4 << "' y='" << mt + 12
        << "' text-anchor='end' font-size='10' fill='steelblue'>empirical</text>\n";
    out << "<text x='" << W - mr - 4 << "' y='" << mt + 26
        << "' text-anchor='end' font-size='10' fill='crimson'>reference</text>\n";
    out << "</svg>\n";
}

}  // namespace bigjump
