// verify.hpp - relational oracle, grid result extraction, differential
// comparison, and randomized instance generation
#pragma once

#include "sheetql/compile.hpp"
#include "sheetql/engine.hpp"
#include "sheetql/query.hpp"
#include "sheetql/table.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sheetql {

struct OracleResult {
    std::vector<std::vector<Value>> rows; // projected values, result order
    int match_count = 0;
};

struct GridResult {
    std::vector<std::vector<Value>> rows; // projected values, slot order
    std::vector<std::string> columns;     // projection column names
    int match_count = 0;                  // leading non-#N/A slots
    bool na_tail_ok = true;               // all later slots are #N/A
    int first_bad_tail_slot = 0;          // 1-based, 0 when the tail is clean
};

struct Mismatch {
    int slot = 0; // 1-based result position
    std::string column;
    std::string oracle;
    std::string grid;
};

struct VerifyReport {
    std::vector<Mismatch> mismatches;
    bool na_tail_ok = true;

    bool pass() const { return mismatches.empty() && na_tail_ok; }
};

// Ground truth straight off the table: filter with the engine's comparison
// semantics, stable-sort by the order keys, then by original row position.
OracleResult oracle_select(const Table& table, const BoundQuery& bq);

// Reads the ordered block when present, else the filter block.
GridResult extract_grid_result(const ValueGrid& vg, const CompilationPlan& plan);

VerifyReport compare_results(const OracleResult& oracle, const GridResult& grid);

// `PASS` or `FAIL`, then one `slot<TAB>column<TAB>oracle<TAB>grid` line per
// mismatch.
std::string render_report(const VerifyReport& report);

struct RandomInstance {
    Table table;
    Query query;
};

// Deterministic in seed. Small value domains on purpose: heavy duplication
// exercises rank ties and the surrogate key's final tie-break digit.
RandomInstance random_instance(uint64_t seed, int max_rows, int max_keys);

// compile -> evaluate -> extract -> compare, end to end.
VerifyReport verify_query(const Table& table, const Query& query, const Layout& layout,
                          const CompileOptions& options = {});

} // namespace sheetql
