#include "sbb/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sbb/errors.hpp"

namespace sbb::csv {

bool Table::has_column(const std::string& name) const {
    for (const auto& h : header) {
        if (h == name) {
            return true;
        }
    }
    return false;
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw SchemaError("missing column '" + name + "'");
}

Table parse(const std::string& text) {
    Table table;
    std::vector<std::string> record;
    std::string cell;
    bool in_quotes = false;
    bool cell_was_quoted = false;
    bool any_cell = false;
    bool have_header = false;

    auto end_cell = [&]() {
        record.push_back(cell);
        cell.clear();
        cell_was_quoted = false;
        any_cell = true;
    };
    auto end_record = [&]() {
        if (!any_cell && record.empty()) {
            return; // blank line
        }
        end_cell();
        if (!have_header) {
            table.header = record;
            have_header = true;
        } else {
            if (record.size() != table.header.size()) {
                throw SchemaError("row " + std::to_string(table.rows.size() + 1) +
                                  " has " + std::to_string(record.size()) +
                                  " fields, header has " + std::to_string(table.header.size()));
            }
            table.rows.push_back(record);
        }
        record.clear();
        any_cell = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (cell.empty() && !cell_was_quoted) {
                in_quotes = true;
                cell_was_quoted = true;
            } else {
                cell.push_back(c);
            }
            break;
        case ',':
            end_cell();
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            break;
        default:
            cell.push_back(c);
            any_cell = true;
        }
    }
    if (in_quotes) {
        throw SchemaError("unterminated quoted field");
    }
    if (any_cell || !cell.empty() || !record.empty()) {
        end_record();
    }
    if (!have_header) {
        throw SchemaError("empty file: header row required");
    }
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse(buf.str());
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

std::string escape(const std::string& cell) {
    const bool needs = cell.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) {
        return cell;
    }
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out += '"';
    return out;
}

void write_file(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    auto write_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << escape(row[i]);
        }
        out << '\n';
    };
    write_row(header);
    for (const auto& row : rows) {
        write_row(row);
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) {
        return false;
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE) {
        return false;
    }
    out = v;
    return true;
}

} // namespace sbb::csv
