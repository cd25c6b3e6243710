#include "alfven/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "alfven/grid.hpp"

namespace alfven {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) { row({}, values); }

void CsvWriter::row(const std::vector<std::string>& labels, const std::vector<double>& values) {
    if (labels.size() + values.size() != columns_) throw Error("csv: row width does not match header");
    bool first = true;
    for (const auto& l : labels) {
        out_ << (first ? "" : ",") << l;
        first = false;
    }
    for (double v : values) {
        out_ << (first ? "" : ",") << format_number(v);
        first = false;
    }
    out_ << '\n';
    if (!out_) throw Error("csv: write failed");
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw Error("csv: missing column '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(cells.size());
    for (const auto& row : cells) {
        double v = std::numeric_limits<double>::quiet_NaN();
        if (c < row.size()) {
            char* end = nullptr;
            const double parsed = std::strtod(row[c].c_str(), &end);
            if (end != row[c].c_str() && *end == '\0') v = parsed;
        }
        out.push_back(v);
    }
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    if (std::getline(in, line)) t.header = split(line);
    while (std::getline(in, line)) {
        if (!line.empty()) t.cells.push_back(split(line));
    }
    return t;
}

}  // namespace alfven
