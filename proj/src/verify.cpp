#include "sheetql/verify.hpp"

#include "sheetql/errors.hpp"

#include <algorithm>
#include <random>

namespace sheetql {

OracleResult oracle_select(const Table& table, const BoundQuery& bq) {
    std::vector<int> picked;
    for (int i = 0; i < table.row_count(); ++i)
        if (!bq.predicate || eval_bound_pred(*bq.predicate, table.rows[i]))
            picked.push_back(i);

    if (!bq.order_keys.empty()) {
        std::stable_sort(picked.begin(), picked.end(), [&](int a, int b) {
            for (const BoundOrderKey& key : bq.order_keys) {
                double va = std::get<double>(table.rows[a][key.column - 1]);
                double vb = std::get<double>(table.rows[b][key.column - 1]);
                if (va != vb)
                    return key.direction == SortDir::Descending ? va > vb : va < vb;
            }
            return false; // stable sort keeps original position order on full ties
        });
    }

    OracleResult out;
    out.match_count = static_cast<int>(picked.size());
    out.rows.reserve(picked.size());
    for (int idx : picked) {
        std::vector<Value> row;
        row.reserve(bq.projection.size());
        for (int col : bq.projection)
            row.push_back(scalar_to_value(table.rows[idx][col - 1]));
        out.rows.push_back(std::move(row));
    }
    return out;
}

GridResult extract_grid_result(const ValueGrid& vg, const CompilationPlan& plan) {
    const ExtractionBlock& blk = plan.order_block ? *plan.order_block : plan.where_block;
    AddressFactory fac = plan.factory();

    auto cell_value = [&](int logical_row, int logical_col) -> Value {
        CellAddr addr = fac.cell(blk.sheet, logical_row, logical_col);
        auto v = vg.find(addr);
        if (!v)
            fail(Errc::MalformedGrid, "plan address outside evaluated grid: " + render_a1(addr));
        return *v;
    };

    GridResult out;
    for (int p = 0; p < blk.n_projected; ++p)
        out.columns.push_back(blk.value_cols[p].name);

    bool in_tail = false;
    for (int s = 0; s < blk.n_slots; ++s) {
        int lrow = plan.data_start + s;
        Value rownum = cell_value(lrow, blk.rownum_col);
        if (!in_tail && !rownum.is_na()) {
            ++out.match_count;
            std::vector<Value> row;
            row.reserve(blk.n_projected);
            for (int p = 0; p < blk.n_projected; ++p)
                row.push_back(cell_value(lrow, blk.value_cols[p].block_col));
            out.rows.push_back(std::move(row));
        } else {
            in_tail = true;
            bool clean = rownum.is_na();
            for (int p = 0; clean && p < blk.n_projected; ++p)
                clean = cell_value(lrow, blk.value_cols[p].block_col).is_na();
            if (!clean && out.na_tail_ok) {
                out.na_tail_ok = false;
                out.first_bad_tail_slot = s + 1;
            }
        }
    }
    return out;
}

namespace {

bool values_agree(const Value& a, const Value& b) {
    if (a.is_number() && b.is_number())
        return a.as_number() == b.as_number();
    if (a.is_text() && b.is_text())
        return text_equal_ci(a.as_text(), b.as_text());
    if (a.is_bool() && b.is_bool())
        return a.as_bool() == b.as_bool();
    if (a.is_error() && b.is_error())
        return a.as_error() == b.as_error();
    return false;
}

} // namespace

VerifyReport compare_results(const OracleResult& oracle, const GridResult& grid) {
    VerifyReport report;
    report.na_tail_ok = grid.na_tail_ok;
    if (!grid.na_tail_ok)
        report.mismatches.push_back(
            {grid.first_bad_tail_slot, "(tail)", "#N/A", "(populated)"});

    int common = std::min(oracle.match_count, grid.match_count);
    for (int s = 0; s < common; ++s) {
        const auto& orow = oracle.rows[s];
        const auto& grow = grid.rows[s];
        for (size_t c = 0; c < orow.size() && c < grow.size(); ++c) {
            if (!values_agree(orow[c], grow[c])) {
                std::string column = c < grid.columns.size() ? grid.columns[c]
                                                             : "col" + std::to_string(c + 1);
                report.mismatches.push_back(
                    {s + 1, column, orow[c].display(), grow[c].display()});
            }
        }
    }
    if (oracle.match_count != grid.match_count)
        report.mismatches.push_back({common + 1, "match_count",
                                     std::to_string(oracle.match_count),
                                     std::to_string(grid.match_count)});
    return report;
}

std::string render_report(const VerifyReport& report) {
    std::string out = report.pass() ? "PASS\n" : "FAIL\n";
    for (const Mismatch& m : report.mismatches)
        out += std::to_string(m.slot) + "\t" + m.column + "\t" + m.oracle + "\t" + m.grid +
               "\n";
    return out;
}

// ----------------------------------------------------------- random inputs

namespace {

// mt19937_64 has a standardized sequence; bounded draws use plain modulo so
// the generated instances are identical on every platform.
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(uint64_t seed) : gen(seed) {}

    int below(int n) { return n <= 1 ? 0 : static_cast<int>(gen() % static_cast<uint64_t>(n)); }
    int range(int lo, int hi) { return lo + below(hi - lo + 1); } // inclusive
    bool chance(int percent) { return below(100) < percent; }
};

const char* kNumberNames[] = {"Cost", "Pop", "Qty", "Score"};
const char* kTextNames[] = {"Club", "Product", "Region"};
const char* kTextPool[] = {"GPI", "CV", "NVA", "AB", "ZK", "Mx"};

struct ColumnPlanEntry {
    ColumnDef def;
    int domain = 1; // distinct values to draw from (kept small: many ties)
};

PredPtr random_pred(Rng& rng, const std::vector<ColumnPlanEntry>& cols,
                    const std::vector<std::vector<Scalar>>& rows, int depth);

PredPtr random_leaf(Rng& rng, const std::vector<ColumnPlanEntry>& cols,
                    const std::vector<std::vector<Scalar>>& rows) {
    int ci = rng.below(static_cast<int>(cols.size()));
    const ColumnPlanEntry& col = cols[ci];
    static const CmpOp kOps[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt,
                                 CmpOp::Le, CmpOp::Gt, CmpOp::Ge};
    CmpOp op = kOps[rng.below(6)];

    Comparison cmp;
    cmp.column = col.def.name;
    cmp.op = op;

    bool column_rhs = rng.chance(15);
    if (column_rhs) {
        // Ordering across types is a bind error; draw a same-type partner
        // for <,<=,>,>= and fall back to a literal when none exists.
        std::vector<int> partners;
        bool ordering = op != CmpOp::Eq && op != CmpOp::Ne;
        for (int i = 0; i < static_cast<int>(cols.size()); ++i)
            if (i != ci && (!ordering || cols[i].def.type == col.def.type))
                partners.push_back(i);
        if (!partners.empty()) {
            cmp.rhs = ColumnOperand{cols[partners[rng.below(static_cast<int>(partners.size()))]]
                                        .def.name};
            return std::make_shared<PredNode>(std::move(cmp));
        }
    }
    // Literal from the column's own small domain so predicates actually hit;
    // drawing from a row when available keeps the hit rate high.
    if (!rows.empty() && rng.chance(70)) {
        const Scalar& sample = rows[rng.below(static_cast<int>(rows.size()))][ci];
        if (const double* d = std::get_if<double>(&sample))
            cmp.rhs = *d;
        else
            cmp.rhs = std::get<std::string>(sample);
    } else if (col.def.type == ColType::Number) {
        cmp.rhs = static_cast<double>(rng.below(col.domain) * 5);
    } else {
        cmp.rhs = std::string(kTextPool[rng.below(col.domain)]);
    }
    return std::make_shared<PredNode>(std::move(cmp));
}

PredPtr random_pred(Rng& rng, const std::vector<ColumnPlanEntry>& cols,
                    const std::vector<std::vector<Scalar>>& rows, int depth) {
    int pick = rng.below(100);
    if (depth >= 3 || pick < 55)
        return random_leaf(rng, cols, rows);
    if (pick < 75)
        return std::make_shared<PredNode>(AndNode{random_pred(rng, cols, rows, depth + 1),
                                                  random_pred(rng, cols, rows, depth + 1)});
    if (pick < 90)
        return std::make_shared<PredNode>(OrNode{random_pred(rng, cols, rows, depth + 1),
                                                 random_pred(rng, cols, rows, depth + 1)});
    return std::make_shared<PredNode>(NotNode{random_pred(rng, cols, rows, depth + 1)});
}

} // namespace

RandomInstance random_instance(uint64_t seed, int max_rows, int max_keys) {
    Rng rng(seed);

    int n_number = rng.range(1, 3); // at least one: order keys must be numeric
    int n_text = rng.range(1, 2);
    std::vector<ColumnPlanEntry> cols;
    for (int i = 0; i < n_number; ++i)
        cols.push_back({{kNumberNames[i], ColType::Number}, rng.range(2, 6)});
    for (int i = 0; i < n_text; ++i)
        cols.push_back({{kTextNames[i], ColType::Text}, rng.range(2, 4)});

    int n_rows = rng.range(0, max_rows);
    std::vector<std::vector<Scalar>> rows;
    rows.reserve(n_rows);
    for (int r = 0; r < n_rows; ++r) {
        std::vector<Scalar> row;
        row.reserve(cols.size());
        for (const ColumnPlanEntry& col : cols) {
            if (col.def.type == ColType::Number)
                row.emplace_back(static_cast<double>(rng.below(col.domain) * 5));
            else
                row.emplace_back(std::string(kTextPool[rng.below(col.domain)]));
        }
        rows.push_back(std::move(row));
    }

    std::vector<ColumnDef> defs;
    for (const ColumnPlanEntry& col : cols)
        defs.push_back(col.def);
    Table table = Table::make("Purchases", std::move(defs), std::move(rows));

    Query query;
    query.source = table.name;
    int n_proj = rng.range(1, table.col_count());
    for (int p = 0; p < n_proj; ++p) // repeats allowed on purpose
        query.projection.push_back(table.columns[rng.below(table.col_count())].name);

    if (rng.chance(80))
        query.predicate = random_pred(rng, cols, table.rows, 0);

    int key_budget = std::min(max_keys, n_number);
    int n_order = rng.range(0, key_budget);
    std::vector<int> numeric_cols;
    for (int i = 0; i < n_number; ++i)
        numeric_cols.push_back(i);
    for (int k = 0; k < n_order; ++k) {
        int pick = rng.below(static_cast<int>(numeric_cols.size()));
        int ci = numeric_cols[pick];
        numeric_cols.erase(numeric_cols.begin() + pick);
        query.order_keys.push_back({cols[ci].def.name, rng.chance(50)
                                                           ? SortDir::Descending
                                                           : SortDir::Ascending});
    }
    return {std::move(table), std::move(query)};
}

VerifyReport verify_query(const Table& table, const Query& query, const Layout& layout,
                          const CompileOptions& options) {
    BoundQuery bq = bind_query(query, table);
    CompileResult compiled = compile(bq, table, layout, options);
    ValueGrid vg = evaluate(compiled.workbook);
    GridResult grid = extract_grid_result(vg, compiled.plan);
    OracleResult oracle = oracle_select(table, bq);
    return compare_results(oracle, grid);
}

} // namespace sheetql
