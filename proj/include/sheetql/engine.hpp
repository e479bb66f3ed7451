// engine.hpp - deterministic workbook evaluation: dependency ordering, cycle
// detection, spreadsheet builtins, and parameter overrides
#pragma once

#include "sheetql/formula.hpp"
#include "sheetql/value.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sheetql {

// Dense per-sheet value matrix covering the populated extents; cells never
// populated in the workbook stay empty here too.
struct SheetValues {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<std::optional<Value>> slots; // row-major, (row-1)*n_cols + (col-1)

    const std::optional<Value>& at(int row, int col) const;
};

struct ValueGrid {
    std::map<std::string, SheetValues> sheets;

    // nullopt when the cell was never populated.
    std::optional<Value> find(const CellAddr& addr) const;
    // Spreadsheet read semantics: blank cells are Number 0.
    Value read(const CellAddr& addr) const;
};

struct EvalOrder {
    // Every formula cell exactly once; each appears after all formula cells
    // it references, except members of cycle_cells, which are assigned
    // #CIRC! rather than computed.
    std::vector<CellAddr> order;
    std::vector<CellAddr> cycle_cells; // sorted by (sheet, row, col)
};

EvalOrder build_eval_order(const Workbook& wb);

// Overrides replace parameter cell literals before evaluation; keys must name
// declared params (UnknownParam otherwise). Pure function of (wb, overrides).
ValueGrid evaluate(const Workbook& wb, const std::map<std::string, Value>& overrides = {});

// Builtins, exposed for direct testing. Range arguments arrive as the
// evaluated element list of a single-row or single-column range.
Value fn_if(const Value& cond, const Value& then_v, const Value& else_v);
Value fn_match_exact(const Value& needle, const std::vector<Value>& range);
Value fn_index(const std::vector<Value>& range, const Value& n);
Value fn_rank_eq(const Value& x, const std::vector<Value>& range, const Value& order);
Value eval_binary(BinOp op, const Value& l, const Value& r);

} // namespace sheetql
