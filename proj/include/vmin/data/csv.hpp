#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vmin/types.hpp"

namespace vmin {

/// One numeric CSV table: header `id,<col>,...`, UTF-8, '.' decimal
/// separator, no thousands separators.
struct CsvTable {
    std::string id_header;
    std::vector<std::string> columns;
    std::vector<std::string> row_ids;
    Matrix values;                    // rows x columns
    std::size_t rows_rejected = 0;    // rows dropped for missing/non-finite cells
    std::vector<std::string> rejected_ids;
};

/// Reads a CSV file. Cells that are empty or parse to a non-finite value
/// cause the whole row to be rejected (counted, not fatal); cells that are
/// not numeric at all raise ParseError naming the row and column.
CsvTable read_csv(const std::filesystem::path& path);

/// Writes a table with shortest round-trip formatting, so that
/// read_csv(write_csv(t)) reproduces every value bit-exactly.
void write_csv(const std::filesystem::path& path, const std::string& id_header,
               const std::vector<std::string>& columns, const std::vector<std::string>& row_ids,
               MatrixRef values);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace vmin
