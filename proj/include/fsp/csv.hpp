#pragma once

#include <string>
#include <vector>

#include "fsp/errors.hpp"

namespace fsp {

// Numeric table with named columns. All output is written with %.17g so
// reruns are byte-identical.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    bool has(const std::string& name) const;
    std::size_t col(const std::string& name) const;  // throws MissingColumn
    std::vector<double> column_values(const std::string& name) const;
};

std::string format_double(double v);

std::string to_csv_string(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

}  // namespace fsp
