#pragma once

#include <string>
#include <vector>

#include "fsp/csv.hpp"

namespace fsp {

// Static SVG plots: pure function of the inputs, no timestamps, fixed number
// formatting, so identical inputs give identical bytes.
struct PlotSpec {
    std::string kind = "line";  // line | scatter | loglog-fit | histogram-overlay
    std::string x;
    std::vector<std::string> y;
    std::string title;
    std::string out;  // target path when driven from the CLI
    bool logx = false;
    bool logy = false;
};

// Parses the same [plot] key = value format used by scenario configs.
PlotSpec parse_plot_spec(const std::string& text);
PlotSpec parse_plot_spec_file(const std::string& path);

// One series per (input table, y column). Throws MissingColumn when a named
// column is absent. Empty inputs render axes plus a "no data" note.
std::string emit_plot(const PlotSpec& spec, const std::vector<CsvTable>& inputs);

void write_plot(const std::string& path, const PlotSpec& spec,
                const std::vector<CsvTable>& inputs);

}  // namespace fsp
