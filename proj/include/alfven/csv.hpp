#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace alfven {

/// Comma-separated writer with a fixed header. Numbers use "%.12e", so equal
/// inputs always produce byte-identical files.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    /// Row whose leading cells are text labels.
    void row(const std::vector<std::string>& labels, const std::vector<double>& values);

private:
    std::ofstream out_;
    std::size_t columns_;
};

std::string format_number(double v);

/// Parsed CSV: header plus raw text cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> cells;

    [[nodiscard]] std::size_t column(const std::string& name) const;
    /// Numeric values of one column; non-numeric cells become NaN.
    [[nodiscard]] std::vector<double> values(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace alfven
