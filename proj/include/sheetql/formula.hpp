// formula.hpp - cell addresses, formula expression trees, A1-notation codecs,
// and the workbook container
#pragma once

#include "sheetql/value.hpp"

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sheetql {

constexpr int kMaxCol = 16384;
constexpr int kMaxRow = 1048576;

struct CellAddr {
    std::string sheet;
    int col = 1; // 1-based
    int row = 1; // 1-based

    friend bool operator==(const CellAddr&, const CellAddr&) = default;
    friend auto operator<=>(const CellAddr&, const CellAddr&) = default;
};

struct CellRange {
    std::string sheet;
    int col_start = 1;
    int row_start = 1;
    int col_end = 1;
    int row_end = 1;

    bool single_column() const { return col_start == col_end; }
    bool single_row() const { return row_start == row_end; }
    int size() const { return (col_end - col_start + 1) * (row_end - row_start + 1); }

    friend bool operator==(const CellRange&, const CellRange&) = default;
};

// Column letter codec: 1 -> A, 26 -> Z, 27 -> AA (bijective base 26).
std::string col_letters(int col);
int col_from_letters(std::string_view letters); // 0 when not a valid column

// A1 rendering. Sheet names are single-quoted when they contain anything
// beyond [A-Za-z0-9_], start with a digit, or could be read as a cell
// reference; embedded quotes are doubled.
std::string render_a1(const CellAddr& addr);
std::string render_a1(const CellRange& range);

// Parses `Sheet!A2`, `'My Data'!AA1`, or a bare `A2` resolved against
// home_sheet. parse_a1_range accepts single cells as 1x1 ranges.
CellAddr parse_a1_addr(std::string_view text, std::string_view home_sheet);
CellRange parse_a1_range(std::string_view text, std::string_view home_sheet);

// ------------------------------------------------------------- expressions

enum class BinOp { Add, Sub, Mul, Div, Concat, Eq, Ne, Lt, Le, Gt, Ge };

enum class Builtin { If, Match, Index, RankEq };

int builtin_arity(Builtin fn);
const char* builtin_name(Builtin fn);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct NumberLit {
    double value = 0;
};
struct TextLit {
    std::string value;
};
struct CellRef {
    CellAddr addr;
};
struct RangeRef {
    CellRange range;
};
struct NameRef {
    std::string name;
};
struct Binary {
    BinOp op = BinOp::Add;
    ExprPtr lhs, rhs;
};
struct Call {
    Builtin fn = Builtin::If;
    std::vector<ExprPtr> args;
};

struct Expr : std::variant<NumberLit, TextLit, CellRef, RangeRef, NameRef, Binary, Call> {
    using variant::variant;
};

ExprPtr make_number(double v);
ExprPtr make_text(std::string v);
ExprPtr make_ref(CellAddr addr);
ExprPtr make_range(CellRange range);
ExprPtr make_name(std::string name);
ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_call(Builtin fn, std::vector<ExprPtr> args); // checks arity

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Formula text starts with '='. References on home_sheet render without the
// sheet prefix; everything else carries it. Minimal parenthesization, no
// spaces. parse_formula(render_formula(e)) is structurally equal to e.
std::string render_formula(const ExprPtr& expr, std::string_view home_sheet);
ExprPtr parse_formula(std::string_view text, std::string_view home_sheet);

// --------------------------------------------------------------- workbook

struct Cell {
    // Literal number, literal text, or a formula.
    std::variant<double, std::string, ExprPtr> content;

    bool is_formula() const { return std::holds_alternative<ExprPtr>(content); }
};

struct Sheet {
    // Sparse grid keyed by (row, col), both 1-based.
    std::map<std::pair<int, int>, Cell> cells;

    void set_number(int row, int col, double v) { cells[{row, col}] = Cell{v}; }
    void set_text(int row, int col, std::string v) { cells[{row, col}] = Cell{std::move(v)}; }
    void set_formula(int row, int col, ExprPtr e) { cells[{row, col}] = Cell{std::move(e)}; }

    const Cell* find(int row, int col) const {
        auto it = cells.find({row, col});
        return it == cells.end() ? nullptr : &it->second;
    }

    int max_row() const;
    int max_col() const;
};

using NameTarget = std::variant<CellAddr, CellRange>;

struct Workbook {
    std::vector<std::string> sheet_order;
    std::map<std::string, Sheet> sheets;
    std::map<std::string, NameTarget> names;
    std::map<std::string, CellAddr> params; // subset of names; cells hold literals

    Sheet& add_sheet(const std::string& name);
    const Sheet* find_sheet(const std::string& name) const;

    void define_name(const std::string& name, NameTarget target);
    void define_param(const std::string& name, const CellAddr& addr);
};

} // namespace sheetql
