#include "fsp/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fsp {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 560.0;
constexpr double kMarginL = 72.0;
constexpr double kMarginR = 24.0;
constexpr double kMarginT = 40.0;
constexpr double kMarginB = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Round a range step to 1/2/5 * 10^k.
double nice_step(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double nice = 10.0;
    if (frac <= 1.0) nice = 1.0;
    else if (frac <= 2.0) nice = 2.0;
    else if (frac <= 5.0) nice = 5.0;
    return nice * mag;
}

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void grow(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
    void pad() {
        if (!valid()) {
            lo = 0.0;
            hi = 1.0;
        } else if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        } else {
            const double p = 0.05 * (hi - lo);
            lo -= p;
            hi += p;
        }
    }
};

class Svg {
  public:
    Svg(const std::string& title, Range xr, Range yr, const std::string& xlabel)
        : xr_(xr), yr_(yr) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
             << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
        out_ << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
             << "\" fill=\"white\"/>\n";
        if (!title.empty())
            out_ << "<text x=\"" << kWidth / 2
                 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                    "font-size=\"16\">"
                 << title << "</text>\n";
        axes(xlabel);
    }

    double px(double x) const {
        return kMarginL + (x - xr_.lo) / (xr_.hi - xr_.lo) * (kWidth - kMarginL - kMarginR);
    }
    double py(double y) const {
        return kHeight - kMarginB -
               (y - yr_.lo) / (yr_.hi - yr_.lo) * (kHeight - kMarginT - kMarginB);
    }

    void polyline(const Series& s, const char* color) {
        if (s.x.empty()) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) out_ << ' ';
            out_ << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
        }
        out_ << "\"/>\n";
    }

    void dots(const Series& s, const char* color, double radius = 3.0) {
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out_ << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
                 << "\" r=\"" << radius << "\" fill=\"" << color << "\"/>\n";
    }

    void bars(const Series& s, const char* color) {
        if (s.x.size() < 2) {
            dots(s, color);
            return;
        }
        const double w = 0.8 * (px(s.x[1]) - px(s.x[0]));
        const double y0 = py(std::max(0.0, yr_.lo));
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double cx = px(s.x[i]);
            const double top = py(s.y[i]);
            out_ << "<rect x=\"" << fmt(cx - 0.5 * w) << "\" y=\"" << fmt(std::min(top, y0))
                 << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(std::abs(y0 - top))
                 << "\" fill=\"" << color << "\" fill-opacity=\"0.55\"/>\n";
        }
    }

    void line_between(double x0, double y0, double x1, double y1, const char* color) {
        out_ << "<line x1=\"" << fmt(px(x0)) << "\" y1=\"" << fmt(py(y0)) << "\" x2=\""
             << fmt(px(x1)) << "\" y2=\"" << fmt(py(y1)) << "\" stroke=\"" << color
             << "\" stroke-width=\"1.2\" stroke-dasharray=\"6 3\"/>\n";
    }

    void annotate(const std::string& txt) {
        out_ << "<text x=\"" << kMarginL + 12 << "\" y=\"" << kMarginT + 16
             << "\" font-family=\"sans-serif\" font-size=\"13\">" << txt << "</text>\n";
    }

    void center_note(const std::string& txt) {
        out_ << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
                "fill=\"#666666\">"
             << txt << "</text>\n";
    }

    void legend(const std::vector<std::string>& labels) {
        double y = kMarginT + 10.0;
        const double x = kWidth - kMarginR - 180.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const char* color = kPalette[i % 8];
            out_ << "<rect x=\"" << x << "\" y=\"" << fmt(y - 9) << "\" width=\"14\" height=\"4\""
                 << " fill=\"" << color << "\"/>\n";
            out_ << "<text x=\"" << x + 20 << "\" y=\"" << fmt(y - 4)
                 << "\" font-family=\"sans-serif\" font-size=\"12\">" << labels[i]
                 << "</text>\n";
            y += 18.0;
        }
    }

    std::string str() {
        out_ << "</svg>\n";
        return out_.str();
    }

  private:
    void axes(const std::string& xlabel) {
        out_ << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB << "\" x2=\""
             << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB
             << "\" stroke=\"black\"/>\n";
        out_ << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\"" << kMarginL
             << "\" y2=\"" << kHeight - kMarginB << "\" stroke=\"black\"/>\n";

        const double xs = nice_step(xr_.hi - xr_.lo);
        for (double v = std::ceil(xr_.lo / xs) * xs; v <= xr_.hi + 1e-12 * xs; v += xs) {
            out_ << "<line x1=\"" << fmt(px(v)) << "\" y1=\"" << kHeight - kMarginB << "\" x2=\""
                 << fmt(px(v)) << "\" y2=\"" << kHeight - kMarginB + 5 << "\" stroke=\"black\"/>\n";
            out_ << "<text x=\"" << fmt(px(v)) << "\" y=\"" << kHeight - kMarginB + 20
                 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
                 << fmt(v, "%.4g") << "</text>\n";
        }
        const double ys = nice_step(yr_.hi - yr_.lo);
        for (double v = std::ceil(yr_.lo / ys) * ys; v <= yr_.hi + 1e-12 * ys; v += ys) {
            out_ << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << fmt(py(v)) << "\" x2=\""
                 << kMarginL << "\" y2=\"" << fmt(py(v)) << "\" stroke=\"black\"/>\n";
            out_ << "<text x=\"" << kMarginL - 8 << "\" y=\"" << fmt(py(v) + 4)
                 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
                 << fmt(v, "%.4g") << "</text>\n";
        }
        if (!xlabel.empty())
            out_ << "<text x=\"" << (kMarginL + kWidth - kMarginR) / 2 << "\" y=\""
                 << kHeight - 14
                 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
                 << xlabel << "</text>\n";
    }

    Range xr_, yr_;
    std::ostringstream out_;
};

std::vector<Series> collect_series(const PlotSpec& spec, const std::vector<CsvTable>& inputs) {
    std::vector<Series> series;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        const CsvTable& tab = inputs[t];
        const std::size_t xi = tab.col(spec.x);
        for (const auto& yname : spec.y) {
            const std::size_t yi = tab.col(yname);
            Series s;
            s.label = inputs.size() > 1 ? yname + "[" + std::to_string(t) + "]" : yname;
            for (const auto& row : tab.rows) {
                s.x.push_back(row[xi]);
                s.y.push_back(row[yi]);
            }
            series.push_back(std::move(s));
        }
    }
    return series;
}

void apply_log(Series& s, bool logx, bool logy) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (logx) s.x[i] = std::log10(std::max(s.x[i], 1e-300));
        if (logy) s.y[i] = std::log10(std::max(std::abs(s.y[i]), 1e-300));
    }
}

}  // namespace

PlotSpec parse_plot_spec(const std::string& text) {
    PlotSpec spec;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw Error("plot spec: expected 'key = value': " + t);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "kind") spec.kind = value;
        else if (key == "x") spec.x = value;
        else if (key == "y") {
            std::istringstream vs(value);
            std::string col;
            while (vs >> col) spec.y.push_back(col);
        } else if (key == "title") spec.title = value;
        else if (key == "out") spec.out = value;
        else if (key == "logx") spec.logx = (value == "true" || value == "1");
        else if (key == "logy") spec.logy = (value == "true" || value == "1");
        else throw Error("plot spec: unknown key '" + key + "'");
    }
    if (spec.kind != "line" && spec.kind != "scatter" && spec.kind != "loglog-fit" &&
        spec.kind != "histogram-overlay")
        throw Error("plot spec: unknown kind '" + spec.kind + "'");
    if (spec.x.empty() || spec.y.empty()) throw Error("plot spec: x and y columns required");
    return spec;
}

PlotSpec parse_plot_spec_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_plot_spec(ss.str());
}

std::string emit_plot(const PlotSpec& spec, const std::vector<CsvTable>& inputs) {
    std::vector<Series> series = collect_series(spec, inputs);

    const bool loglog = spec.kind == "loglog-fit";
    for (auto& s : series) apply_log(s, spec.logx || loglog, spec.logy || loglog);

    std::size_t n_points = 0;
    Range xr, yr;
    for (const auto& s : series) {
        n_points += s.x.size();
        for (double v : s.x) xr.grow(v);
        for (double v : s.y) yr.grow(v);
    }
    xr.pad();
    yr.pad();

    std::string xlabel = spec.x;
    if (spec.logx || loglog) xlabel = "log10 " + xlabel;

    Svg svg(spec.title, xr, yr, xlabel);
    if (n_points == 0) {
        svg.center_note("no data");
        return svg.str();
    }

    if (spec.kind == "histogram-overlay") {
        // First series as bars, the rest as lines.
        svg.bars(series[0], kPalette[0]);
        for (std::size_t i = 1; i < series.size(); ++i) svg.polyline(series[i], kPalette[i % 8]);
    } else if (spec.kind == "loglog-fit") {
        for (std::size_t i = 0; i < series.size(); ++i) svg.dots(series[i], kPalette[i % 8]);
        // Least squares over all points of all series.
        double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
        for (const auto& s : series)
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                sx += s.x[i];
                sy += s.y[i];
                sxx += s.x[i] * s.x[i];
                sxy += s.x[i] * s.y[i];
                n += 1.0;
            }
        if (n >= 2.0 && n * sxx - sx * sx != 0.0) {
            const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            const double icept = (sy - slope * sx) / n;
            svg.line_between(xr.lo, slope * xr.lo + icept, xr.hi, slope * xr.hi + icept,
                             "#333333");
            svg.annotate("slope=" + fmt(slope, "%.2f"));
        }
    } else if (spec.kind == "scatter") {
        for (std::size_t i = 0; i < series.size(); ++i) svg.dots(series[i], kPalette[i % 8]);
    } else {
        for (std::size_t i = 0; i < series.size(); ++i) svg.polyline(series[i], kPalette[i % 8]);
    }

    std::vector<std::string> labels;
    for (const auto& s : series) labels.push_back(s.label);
    if (labels.size() > 1) svg.legend(labels);
    return svg.str();
}

void write_plot(const std::string& path, const PlotSpec& spec,
                const std::vector<CsvTable>& inputs) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << emit_plot(spec, inputs);
}

}  // namespace fsp
