#include "sheetql/table.hpp"

#include "sheetql/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

namespace sheetql {

std::string scalar_display(const Scalar& s) {
    if (const double* d = std::get_if<double>(&s)) {
        return display_number(*d);
    }
    return std::get<std::string>(s);
}

Value scalar_to_value(const Scalar& s) {
    if (const double* d = std::get_if<double>(&s)) {
        return Value::number(*d);
    }
    return Value::text(std::get<std::string>(s));
}

std::optional<double> parse_decimal(std::string_view field) {
    if (field.empty()) {
        return std::nullopt;
    }
    bool has_digit = false;
    for (char c : field) {
        if (c >= '0' && c <= '9') {
            has_digit = true;
        } else if (c != '+' && c != '-' && c != '.' && c != 'e' && c != 'E') {
            return std::nullopt;
        }
    }
    if (!has_digit) {
        return std::nullopt;
    }
    std::string buf(field);
    char* end = nullptr;
    double x = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size()) {
        return std::nullopt;
    }
    return x;
}

Table Table::make(std::string name, std::vector<ColumnDef> columns,
                  std::vector<std::vector<Scalar>> rows) {
    std::set<std::string> seen;
    for (const ColumnDef& col : columns) {
        if (col.name.empty() || col.name.find('\t') != std::string::npos
            || col.name.find('\n') != std::string::npos || col.name.find('\r') != std::string::npos) {
            fail(Errc::BadColumnName, "column name empty or contains tab/newline");
        }
        if (!seen.insert(col.name).second) {
            fail(Errc::DuplicateColumn, "duplicate column name '" + col.name + "'");
        }
    }
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns.size()) {
            fail(Errc::RaggedRows, "row " + std::to_string(r + 1) + " has "
                + std::to_string(rows[r].size()) + " values, expected "
                + std::to_string(columns.size()));
        }
        for (size_t c = 0; c < columns.size(); ++c) {
            bool is_num = std::holds_alternative<double>(rows[r][c]);
            if (columns[c].type == ColType::Number && !is_num) {
                fail(Errc::UnparsableNumber, "column '" + columns[c].name
                    + "' is declared numeric but row " + std::to_string(r + 1)
                    + " holds text");
            }
            if (columns[c].type == ColType::Text && is_num) {
                fail(Errc::BadValue, "column '" + columns[c].name
                    + "' is declared text but row " + std::to_string(r + 1)
                    + " holds a number");
            }
        }
    }
    Table t;
    t.name = std::move(name);
    t.columns = std::move(columns);
    t.rows = std::move(rows);
    return t;
}

std::optional<int> Table::find_column(std::string_view name) const {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) {
            return static_cast<int>(i) + 1;
        }
    }
    return std::nullopt;
}

namespace {

// RFC-4180 record reader: fields split on commas, double-quoted fields may
// contain commas, quotes ("" escape) and line breaks.
std::vector<std::vector<std::string>> read_csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any_char = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        any_char = true;
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
        } else if (c == '"' && field.empty() && !field_was_quoted) {
            in_quotes = true;
            field_was_quoted = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' || c == '\n') {
            end_record();
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            ++i;
        } else {
            field.push_back(c);
            ++i;
        }
    }
    if (in_quotes) {
        fail(Errc::BadValue, "unterminated quoted field");
    }
    // Final record without a trailing newline.
    if (!field.empty() || field_was_quoted || !record.empty()) {
        end_record();
    }
    if (!any_char) {
        return {};
    }
    return records;
}

} // namespace

Table load_table(std::string_view csv_text, std::string_view table_name) {
    std::vector<std::vector<std::string>> records = read_csv_records(csv_text);
    if (records.empty()) {
        fail(Errc::EmptyInput, "no header line");
    }
    const std::vector<std::string>& header = records[0];
    size_t n_cols = header.size();
    for (size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != n_cols) {
            fail(Errc::RaggedRows, "line " + std::to_string(r + 1) + " has "
                + std::to_string(records[r].size()) + " fields, expected "
                + std::to_string(n_cols));
        }
    }

    std::vector<ColumnDef> columns;
    columns.reserve(n_cols);
    for (size_t c = 0; c < n_cols; ++c) {
        bool numeric = true;
        bool has_empty = false;
        for (size_t r = 1; r < records.size(); ++r) {
            const std::string& f = records[r][c];
            if (f.empty()) {
                has_empty = true;
            } else if (!parse_decimal(f)) {
                numeric = false;
                break;
            }
        }
        if (numeric && has_empty) {
            fail(Errc::EmptyNumberField, "column '" + header[c]
                + "' is numeric but contains empty fields");
        }
        columns.push_back({header[c], numeric ? ColType::Number : ColType::Text});
    }

    std::vector<std::vector<Scalar>> rows;
    rows.reserve(records.size() - 1);
    for (size_t r = 1; r < records.size(); ++r) {
        std::vector<Scalar> row;
        row.reserve(n_cols);
        for (size_t c = 0; c < n_cols; ++c) {
            if (columns[c].type == ColType::Number) {
                row.emplace_back(*parse_decimal(records[r][c]));
            } else {
                row.emplace_back(records[r][c]);
            }
        }
        rows.push_back(std::move(row));
    }
    return Table::make(std::string(table_name), std::move(columns), std::move(rows));
}

std::string csv_quote(const std::string& field) {
    bool needs = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string write_csv(const Table& table) {
    std::string out;
    for (int c = 0; c < table.col_count(); ++c) {
        if (c > 0) {
            out.push_back(',');
        }
        out += csv_quote(table.columns[c].name);
    }
    out.push_back('\n');
    for (const auto& row : table.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c > 0) {
                out.push_back(',');
            }
            if (const double* d = std::get_if<double>(&row[c])) {
                out += canonical_number(*d);
            } else {
                out += csv_quote(std::get<std::string>(row[c]));
            }
        }
        out.push_back('\n');
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) {
        ++b;
    }
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
        --e;
    }
    return s.substr(b, e - b);
}

int parse_positive_index(std::string_view key, std::string_view value) {
    int out = 0;
    if (value.empty()) {
        fail(Errc::BadValue, std::string(key) + ": empty value");
    }
    for (char c : value) {
        if (c < '0' || c > '9') {
            fail(Errc::BadValue, std::string(key) + ": '" + std::string(value)
                + "' is not a positive integer");
        }
        out = out * 10 + (c - '0');
        if (out > 1'048'576) {
            fail(Errc::BadValue, std::string(key) + ": index too large");
        }
    }
    if (out < 1) {
        fail(Errc::BadValue, std::string(key) + ": index must be >= 1");
    }
    return out;
}

} // namespace

Layout parse_layout(std::string_view config_text) {
    Layout layout;
    size_t pos = 0;
    while (pos <= config_text.size()) {
        size_t nl = config_text.find('\n', pos);
        std::string_view line = config_text.substr(pos, nl == std::string_view::npos
            ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? config_text.size() + 1 : nl + 1;

        std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            continue;
        }
        size_t eq = stripped.find('=');
        if (eq == std::string_view::npos) {
            fail(Errc::BadValue, "expected 'key = value': " + std::string(stripped));
        }
        std::string_view key = trim(stripped.substr(0, eq));
        std::string_view value = trim(stripped.substr(eq + 1));

        if (key == "orientation") {
            if (value == "vertical") {
                layout.orientation = Orientation::Vertical;
            } else if (value == "horizontal") {
                layout.orientation = Orientation::Horizontal;
            } else {
                fail(Errc::BadValue, "orientation: '" + std::string(value)
                    + "' is not vertical|horizontal");
            }
        } else if (key == "source_sheet_name") {
            if (value.empty()) {
                fail(Errc::BadValue, "source_sheet_name: empty");
            }
            layout.source_sheet_name = std::string(value);
        } else if (key == "header_index") {
            layout.header_index = parse_positive_index(key, value);
        } else if (key == "data_start_index") {
            layout.data_start_index = parse_positive_index(key, value);
        } else {
            fail(Errc::UnknownKey, "unknown layout key '" + std::string(key) + "'");
        }
    }
    if (layout.data_start_index <= layout.header_index) {
        fail(Errc::InconsistentIndices, "data_start_index ("
            + std::to_string(layout.data_start_index) + ") must exceed header_index ("
            + std::to_string(layout.header_index) + ")");
    }
    return layout;
}

} // namespace sheetql
