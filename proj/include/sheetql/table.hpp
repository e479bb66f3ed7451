// table.hpp - CSV ingestion with type inference, plus the source layout config
#pragma once

#include "sheetql/value.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sheetql {

enum class ColType { Number, Text };

struct ColumnDef {
    std::string name;
    ColType type = ColType::Text;

    friend bool operator==(const ColumnDef&, const ColumnDef&) = default;
};

// One table cell. Number columns hold doubles, text columns hold strings.
using Scalar = std::variant<double, std::string>;

std::string scalar_display(const Scalar& s);
Value scalar_to_value(const Scalar& s);

struct Table {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<std::vector<Scalar>> rows;

    // Validates column names, row arity and type conformance.
    static Table make(std::string name, std::vector<ColumnDef> columns,
                      std::vector<std::vector<Scalar>> rows);

    int row_count() const { return static_cast<int>(rows.size()); }
    int col_count() const { return static_cast<int>(columns.size()); }

    // 1-based column index, or nullopt when the name is absent.
    std::optional<int> find_column(std::string_view name) const;

    friend bool operator==(const Table&, const Table&) = default;
};

enum class Orientation { Vertical, Horizontal };

// Where and how the source dataset is placed in the workbook. For vertical
// layouts the indices are rows, for horizontal layouts they are columns.
struct Layout {
    Orientation orientation = Orientation::Vertical;
    std::string source_sheet_name = "Source";
    int header_index = 1;
    int data_start_index = 2;

    friend bool operator==(const Layout&, const Layout&) = default;
};

// RFC-4180 CSV, first line is the header. A column is numeric iff every
// non-empty field parses as a decimal number; empty fields in a numeric
// column are rejected.
Table load_table(std::string_view csv_text, std::string_view table_name);

std::string write_csv(const Table& table);

// RFC-4180 field quoting: wraps in double quotes when the field contains a
// comma, quote, or line break.
std::string csv_quote(const std::string& field);

// Line-oriented `key = value` config, `#` begins a comment line.
Layout parse_layout(std::string_view config_text);

// Strict decimal parse of a whole field: no surrounding whitespace, no
// inf/nan/hex forms.
std::optional<double> parse_decimal(std::string_view field);

} // namespace sheetql
