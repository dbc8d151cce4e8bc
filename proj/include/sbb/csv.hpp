#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sbb::csv {

/// Parsed CSV file: header row plus string cells.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    bool has_column(const std::string& name) const;
    /// Index of a named column; throws SchemaError when absent.
    std::size_t column(const std::string& name) const;
};

/// RFC-4180 style reader: quoted fields, "" escapes, embedded newlines,
/// CRLF tolerant. Header row is required. Throws IoError when the file
/// cannot be opened, SchemaError on a malformed record.
Table read_file(const std::string& path);

Table parse(const std::string& text);

/// Quote a cell only when it needs quoting.
std::string escape(const std::string& cell);

void write_file(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

/// Strict decimal-real parse of a whole cell; rejects trailing garbage.
bool parse_double(const std::string& cell, double& out);

} // namespace sbb::csv
