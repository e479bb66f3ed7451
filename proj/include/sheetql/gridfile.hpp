// gridfile.hpp - on-disk text formats: the formula grid, the compilation
// plan sidecar, and evaluated values output
#pragma once

#include "sheetql/compile.hpp"
#include "sheetql/engine.hpp"
#include "sheetql/formula.hpp"

#include <string>

namespace sheetql {

// Sectioned TSV: `== SHEET <name> ==` heads each sheet, one row per line,
// cells separated by tabs. A cell starting with `=` is a formula, a cell
// parsing as a decimal is a number, anything else is text; empty fields are
// absent cells. A `== NAMES ==` section lists `name<TAB>a1-target` and a
// `== PARAMS ==` section lists parameter names (a subset of NAMES).
std::string write_grid(const Workbook& wb);
Workbook read_grid(std::string_view text);

// Same sectioned style for the plan: `== PLAN ==` scalars, `== WHERE ==` and
// optional `== RANKS ==`/`== ORDERED ==` blocks, and `== PARAMS ==`.
std::string write_plan(const CompilationPlan& plan);
CompilationPlan read_plan(std::string_view text);

struct ValuesOptions {
    bool na_blank = false; // render #N/A cells as empty fields
};

// CSV rows under `== SHEET <name> ==` headers, in workbook sheet order;
// numbers carry at most 15 significant digits, errors their canonical token.
std::string write_values(const Workbook& wb, const ValueGrid& grid,
                         const ValuesOptions& options = {});

} // namespace sheetql
