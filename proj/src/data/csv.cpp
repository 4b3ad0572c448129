#include "vmin/data/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "vmin/errors.hpp"

namespace vmin {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

enum class CellStatus { Ok, Missing, Malformed };

CellStatus parse_cell(const std::string& text, double& out) {
    if (text.empty()) return CellStatus::Missing;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) return CellStatus::Malformed;
    if (!std::isfinite(out)) return CellStatus::Missing;
    return CellStatus::Ok;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw IoError("failed to format double");
    return std::string(buf, ptr);
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    CsvTable table;
    std::vector<std::string> header = split_line(line);
    if (header.size() < 2) throw ParseError("CSV header needs an id column and at least one value column: " + path.string());
    table.id_header = header.front();
    table.columns.assign(header.begin() + 1, header.end());
    std::unordered_set<std::string> seen;
    for (const std::string& c : table.columns) {
        if (!seen.insert(c).second) {
            throw ParseError(path.string() + ": duplicate column name '" + c + "'");
        }
    }

    std::vector<double> data;
    std::vector<double> row(table.columns.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size()) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        bool reject = false;
        for (std::size_t j = 0; j + 1 < fields.size(); ++j) {
            double v = 0.0;
            switch (parse_cell(fields[j + 1], v)) {
                case CellStatus::Ok:
                    row[j] = v;
                    break;
                case CellStatus::Missing:
                    reject = true;
                    break;
                case CellStatus::Malformed:
                    throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                     ": non-numeric cell in column '" + table.columns[j] + "': '" +
                                     fields[j + 1] + "'");
            }
            if (reject) break;
        }
        if (reject) {
            ++table.rows_rejected;
            table.rejected_ids.push_back(fields.front());
            continue;
        }
        table.row_ids.push_back(fields.front());
        data.insert(data.end(), row.begin(), row.end());
    }

    const Index n = static_cast<Index>(table.row_ids.size());
    const Index m = static_cast<Index>(table.columns.size());
    table.values.resize(n, m);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
            table.values(i, j) = data[static_cast<std::size_t>(i * m + j)];
        }
    }
    return table;
}

void write_csv(const std::filesystem::path& path, const std::string& id_header,
               const std::vector<std::string>& columns, const std::vector<std::string>& row_ids,
               MatrixRef values) {
    if (values.rows() != static_cast<Index>(row_ids.size()) ||
        values.cols() != static_cast<Index>(columns.size())) {
        throw DimensionError("write_csv: metadata does not match value shape");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open CSV file for writing: " + path.string());
    out << id_header;
    for (const std::string& c : columns) out << ',' << c;
    out << '\n';
    for (Index i = 0; i < values.rows(); ++i) {
        out << row_ids[static_cast<std::size_t>(i)];
        for (Index j = 0; j < values.cols(); ++j) out << ',' << format_double(values(i, j));
        out << '\n';
    }
    if (!out) throw IoError("failed writing CSV file: " + path.string());
}

}  // namespace vmin
