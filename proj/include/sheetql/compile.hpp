// compile.hpp - lowering a bound query into a self-recalculating workbook:
// indicator column, running selection sequence, extraction blocks, rank
// columns and the surrogate sort key
#pragma once

#include "sheetql/formula.hpp"
#include "sheetql/query.hpp"
#include "sheetql/table.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sheetql {

// Maps logical (row, column) positions to physical cells; the horizontal
// orientation is a pure transpose, applied uniformly to every sheet.
struct AddressFactory {
    Orientation orientation = Orientation::Vertical;

    CellAddr cell(std::string sheet, int logical_row, int logical_col) const {
        if (orientation == Orientation::Vertical)
            return CellAddr{std::move(sheet), logical_col, logical_row};
        return CellAddr{std::move(sheet), logical_row, logical_col};
    }

    CellRange column_span(std::string sheet, int logical_col, int logical_row_start,
                          int logical_row_end) const {
        if (orientation == Orientation::Vertical)
            return CellRange{std::move(sheet), logical_col, logical_row_start, logical_col,
                             logical_row_end};
        return CellRange{std::move(sheet), logical_row_start, logical_col, logical_row_end,
                         logical_col};
    }
};

struct ValueColumn {
    int source_col = 0; // column indexed into (source sheet, or donor block)
    int block_col = 0;  // logical column of the INDEX formulas in this block
    std::string name;
};

struct ExtractionBlock {
    std::string sheet;
    int seq_col = 0;    // literals 1..n_slots
    int rownum_col = 0; // MATCH formulas
    std::vector<ValueColumn> value_cols;
    int n_slots = 0;
    int n_projected = 0; // leading value_cols that mirror the projection 1:1
};

struct RankColumn {
    int key_source_col = 0; // order-key column in the source table
    SortDir dir = SortDir::Ascending;
    int key_block_col = 0; // extracted key values, on the filter block's sheet
    int block_col = 0;     // RANK.EQ formulas
    std::string name;
};

struct CompilationPlan {
    Orientation orientation = Orientation::Vertical;
    std::string source_sheet;
    int header_index = 1;
    int data_start = 2;
    int n_rows = 0;

    int indicator_col = 0;
    int seqno_col = 0;
    ExtractionBlock where_block;

    std::vector<RankColumn> rank_cols;
    std::optional<int> sk_col;
    std::optional<int> sk_rank_col;
    std::optional<ExtractionBlock> order_block;
    long long base_a = 1;
    bool surrogate_key = true;

    std::map<std::string, CellAddr> params;

    AddressFactory factory() const { return AddressFactory{orientation}; }
};

struct CompileOptions {
    // When false, the ordered block matches directly on the first key's rank
    // column instead of the surrogate key's rank; duplicate key values then
    // collapse to one matched slot and the rest read #N/A. Kept as a switch
    // so tests can pin down exactly that failure mode.
    bool surrogate_key = true;
};

struct CompileResult {
    Workbook workbook;
    CompilationPlan plan;
};

CompileResult compile(const BoundQuery& bq, const Table& table, const Layout& layout,
                      const CompileOptions& options = {});

// Minimal valid base for the surrogate key: one more than the set size.
long long surrogate_base(long long n);

// Requires (n+1)^(k+1) <= 2^53 so every surrogate key is an exactly
// representable integer; throws SkCapacityExceeded otherwise.
void check_sk_capacity(long long n, int k);

struct LiftResult {
    PredPtr predicate; // literals replaced by Param_1, Param_2, ... leaves
    std::vector<std::pair<std::string, Scalar>> params;
};

LiftResult lift_literals(const PredPtr& pred);

} // namespace sheetql
