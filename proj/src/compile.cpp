#include "sheetql/compile.hpp"

#include "sheetql/errors.hpp"

#include <string>

namespace sheetql {

long long surrogate_base(long long n) {
    return n + 1;
}

void check_sk_capacity(long long n, int k) {
    const __int128 limit = static_cast<__int128>(1) << 53;
    __int128 power = 1;
    for (int i = 0; i < k + 1; ++i) {
        power *= n + 1;
        if (power > limit)
            fail(Errc::SkCapacityExceeded,
                 "surrogate keys overflow exact integer range: (" + std::to_string(n) +
                     "+1)^" + std::to_string(k + 1) + " > 2^53 (rows n=" + std::to_string(n) +
                     ", order keys k=" + std::to_string(k) + ")");
    }
}

namespace {

PredPtr lift_walk(const PredNode& node, std::vector<std::pair<std::string, Scalar>>& params) {
    if (const auto* cmp = std::get_if<Comparison>(&node)) {
        Comparison out = *cmp;
        Scalar lit;
        bool is_literal = false;
        if (const double* d = std::get_if<double>(&cmp->rhs)) {
            lit = *d;
            is_literal = true;
        } else if (const std::string* s = std::get_if<std::string>(&cmp->rhs)) {
            lit = *s;
            is_literal = true;
        }
        if (is_literal) {
            std::string name = "Param_" + std::to_string(params.size() + 1);
            params.emplace_back(name, std::move(lit));
            out.rhs = ParamRef{std::move(name)};
        }
        return std::make_shared<PredNode>(std::move(out));
    }
    if (const auto* a = std::get_if<AndNode>(&node))
        return std::make_shared<PredNode>(
            AndNode{lift_walk(*a->lhs, params), lift_walk(*a->rhs, params)});
    if (const auto* o = std::get_if<OrNode>(&node))
        return std::make_shared<PredNode>(
            OrNode{lift_walk(*o->lhs, params), lift_walk(*o->rhs, params)});
    return std::make_shared<PredNode>(NotNode{lift_walk(*std::get<NotNode>(node).child, params)});
}

} // namespace

LiftResult lift_literals(const PredPtr& pred) {
    LiftResult out;
    if (pred)
        out.predicate = lift_walk(*pred, out.params);
    return out;
}

namespace {

BinOp cmp_to_binop(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return BinOp::Eq;
    case CmpOp::Ne: return BinOp::Ne;
    case CmpOp::Lt: return BinOp::Lt;
    case CmpOp::Le: return BinOp::Le;
    case CmpOp::Gt: return BinOp::Gt;
    case CmpOp::Ge: return BinOp::Ge;
    }
    return BinOp::Eq;
}

void put(Sheet& sheet, const CellAddr& addr, double v) {
    sheet.set_number(addr.row, addr.col, v);
}
void put(Sheet& sheet, const CellAddr& addr, std::string v) {
    sheet.set_text(addr.row, addr.col, std::move(v));
}
void put(Sheet& sheet, const CellAddr& addr, ExprPtr e) {
    sheet.set_formula(addr.row, addr.col, std::move(e));
}

// Lowers the lifted predicate to a boolean-valued condition expression for
// one data row. The builtin set has no AND/OR/NOT, so combinators become
// nested IFs whose conditions accept booleans and 0/1 numbers alike:
//   a AND b -> IF(a, b, 0)      a OR b -> IF(a, 1, b)      NOT a -> IF(a, 0, 1)
struct PredLowering {
    const Table& table;
    const AddressFactory& fac;
    const std::string& sheet;

    ExprPtr condition(const PredNode& node, int logical_row) const {
        if (const auto* cmp = std::get_if<Comparison>(&node)) {
            int col = *table.find_column(cmp->column);
            ExprPtr lhs = make_ref(fac.cell(sheet, logical_row, col));
            ExprPtr rhs;
            if (const double* d = std::get_if<double>(&cmp->rhs)) {
                rhs = make_number(*d);
            } else if (const std::string* s = std::get_if<std::string>(&cmp->rhs)) {
                rhs = make_text(*s);
            } else if (const auto* other = std::get_if<ColumnOperand>(&cmp->rhs)) {
                rhs = make_ref(fac.cell(sheet, logical_row, *table.find_column(other->name)));
            } else {
                rhs = make_name(std::get<ParamRef>(cmp->rhs).name);
            }
            return make_binary(cmp_to_binop(cmp->op), std::move(lhs), std::move(rhs));
        }
        if (const auto* a = std::get_if<AndNode>(&node))
            return make_call(Builtin::If, {condition(*a->lhs, logical_row),
                                           condition(*a->rhs, logical_row), make_number(0)});
        if (const auto* o = std::get_if<OrNode>(&node))
            return make_call(Builtin::If, {condition(*o->lhs, logical_row), make_number(1),
                                           condition(*o->rhs, logical_row)});
        const auto& n = std::get<NotNode>(node);
        return make_call(Builtin::If,
                         {condition(*n.child, logical_row), make_number(0), make_number(1)});
    }
};

} // namespace

CompileResult compile(const BoundQuery& bq, const Table& table, const Layout& layout,
                      const CompileOptions& options) {
    const std::string& src_name = layout.source_sheet_name;
    for (const char* reserved : {"Params", "Where", "Ordered"})
        if (src_name == reserved)
            fail(Errc::BadSheetName, "source sheet name '" + src_name + "' is reserved");

    const int n = table.row_count();
    const int n_cols = table.col_count();
    const int n_keys = static_cast<int>(bq.order_keys.size());
    const bool ordered = n_keys > 0;
    const bool with_sk = ordered && options.surrogate_key;
    if (with_sk)
        check_sk_capacity(n, n_keys);

    const int header = layout.header_index;
    const int data_start = layout.data_start_index;
    const int data_end = data_start + n - 1;

    AddressFactory fac{layout.orientation};
    CompilationPlan plan;
    plan.orientation = layout.orientation;
    plan.source_sheet = src_name;
    plan.header_index = header;
    plan.data_start = data_start;
    plan.n_rows = n;
    plan.base_a = surrogate_base(n);
    plan.surrogate_key = options.surrogate_key;
    plan.indicator_col = n_cols + 1;
    plan.seqno_col = n_cols + 2;

    Workbook wb;
    Sheet& source = wb.add_sheet(src_name);

    // --- source sheet: table literals, then indicator and sequence columns
    for (int j = 1; j <= n_cols; ++j)
        put(source, fac.cell(src_name, header, j), table.columns[j - 1].name);
    put(source, fac.cell(src_name, header, plan.indicator_col), std::string("Indicator"));
    put(source, fac.cell(src_name, header, plan.seqno_col), std::string("SeqNo"));
    for (int i = 0; i < n; ++i) {
        int lrow = data_start + i;
        for (int j = 1; j <= n_cols; ++j) {
            const Scalar& cell = table.rows[i][j - 1];
            if (const double* d = std::get_if<double>(&cell))
                put(source, fac.cell(src_name, lrow, j), *d);
            else
                put(source, fac.cell(src_name, lrow, j), std::get<std::string>(cell));
        }
    }

    LiftResult lifted = lift_literals(bq.query.predicate);

    if (!lifted.params.empty()) {
        Sheet& params_sheet = wb.add_sheet("Params");
        int prow = 1;
        for (const auto& [name, initial] : lifted.params) {
            put(params_sheet, fac.cell("Params", prow, 1), name);
            CellAddr value_addr = fac.cell("Params", prow, 2);
            if (const double* d = std::get_if<double>(&initial))
                put(params_sheet, value_addr, *d);
            else
                put(params_sheet, value_addr, std::get<std::string>(initial));
            wb.define_param(name, value_addr);
            plan.params.emplace(name, value_addr);
            ++prow;
        }
    }

    PredLowering lowering{table, fac, src_name};
    for (int i = 0; i < n; ++i) {
        int lrow = data_start + i;
        CellAddr ind = fac.cell(src_name, lrow, plan.indicator_col);
        if (lifted.predicate) {
            ExprPtr cond = lowering.condition(*lifted.predicate, lrow);
            put(source, ind,
                make_call(Builtin::If, {std::move(cond), make_number(1), make_number(0)}));
        } else {
            put(source, ind, 1.0); // no filter: every row is selected
        }
        CellAddr seq = fac.cell(src_name, lrow, plan.seqno_col);
        if (i == 0) {
            put(source, seq, make_ref(ind));
        } else {
            CellAddr prev = fac.cell(src_name, lrow - 1, plan.seqno_col);
            put(source, seq, make_binary(BinOp::Add, make_ref(prev), make_ref(ind)));
        }
    }

    // --- filter extraction block
    Sheet& where = wb.add_sheet("Where");
    ExtractionBlock& blk = plan.where_block;
    blk.sheet = "Where";
    blk.n_slots = n;
    blk.seq_col = 1;
    blk.rownum_col = 2;
    int next_col = 3;
    for (size_t p = 0; p < bq.projection.size(); ++p) {
        int src_col = bq.projection[p];
        blk.value_cols.push_back({src_col, next_col++, table.columns[src_col - 1].name});
    }
    blk.n_projected = static_cast<int>(blk.value_cols.size());
    auto key_value_col = [&](int src_col) -> int {
        for (const ValueColumn& vc : blk.value_cols)
            if (vc.source_col == src_col)
                return vc.block_col;
        return 0;
    };
    for (const BoundOrderKey& key : bq.order_keys) {
        if (key_value_col(key.column) == 0)
            blk.value_cols.push_back(
                {key.column, next_col++, table.columns[key.column - 1].name});
    }

    put(where, fac.cell("Where", header, blk.seq_col), std::string("NoSeq"));
    put(where, fac.cell("Where", header, blk.rownum_col), std::string("Row Num"));
    for (const ValueColumn& vc : blk.value_cols)
        put(where, fac.cell("Where", header, vc.block_col), vc.name);

    CellRange seqno_span = fac.column_span(src_name, plan.seqno_col, data_start, data_end);
    for (int s = 0; s < n; ++s) {
        int lrow = data_start + s;
        CellAddr seq = fac.cell("Where", lrow, blk.seq_col);
        put(where, seq, static_cast<double>(s + 1));
        CellAddr rownum = fac.cell("Where", lrow, blk.rownum_col);
        put(where, rownum,
            make_call(Builtin::Match,
                      {make_ref(seq), make_range(seqno_span), make_number(0)}));
        for (const ValueColumn& vc : blk.value_cols) {
            CellRange src_span = fac.column_span(src_name, vc.source_col, data_start, data_end);
            put(where, fac.cell("Where", lrow, vc.block_col),
                make_call(Builtin::Index, {make_range(src_span), make_ref(rownum)}));
        }
    }

    if (!ordered)
        return {std::move(wb), std::move(plan)};

    // --- rank columns, surrogate key, and the ordered extraction block
    for (int k = 0; k < n_keys; ++k) {
        const BoundOrderKey& key = bq.order_keys[k];
        RankColumn rc;
        rc.key_source_col = key.column;
        rc.dir = key.direction;
        rc.key_block_col = key_value_col(key.column);
        rc.block_col = next_col++;
        rc.name = table.columns[key.column - 1].name;
        put(where, fac.cell("Where", header, rc.block_col), rc.name + " Rank");
        plan.rank_cols.push_back(std::move(rc));
    }
    if (with_sk) {
        plan.sk_col = next_col++;
        plan.sk_rank_col = next_col++;
        put(where, fac.cell("Where", header, *plan.sk_col), std::string("SK"));
        put(where, fac.cell("Where", header, *plan.sk_rank_col), std::string("SK Rank"));
    }

    if (n > 0) {
        for (int k = 0; k < n_keys; ++k) {
            const RankColumn& rc = plan.rank_cols[k];
            std::string key_name = "Key_" + std::to_string(k + 1);
            std::string rank_name = "KeyRank_" + std::to_string(k + 1);
            wb.define_name(key_name,
                           fac.column_span("Where", rc.key_block_col, data_start, data_end));
            wb.define_name(rank_name,
                           fac.column_span("Where", rc.block_col, data_start, data_end));
            double dir01 = rc.dir == SortDir::Descending ? 0 : 1;
            for (int s = 0; s < n; ++s) {
                int lrow = data_start + s;
                put(where, fac.cell("Where", lrow, rc.block_col),
                    make_call(Builtin::RankEq,
                              {make_ref(fac.cell("Where", lrow, rc.key_block_col)),
                               make_name(key_name), make_number(dir01)}));
            }
        }
        if (with_sk) {
            wb.define_name("SK", fac.column_span("Where", *plan.sk_col, data_start, data_end));
            wb.define_name("SK_Rank",
                           fac.column_span("Where", *plan.sk_rank_col, data_start, data_end));
            double base = static_cast<double>(plan.base_a);
            for (int s = 0; s < n; ++s) {
                int lrow = data_start + s;
                // ((rank_1*A + rank_2)*A + ...)*A + seq
                ExprPtr sk = make_ref(fac.cell("Where", lrow, plan.rank_cols[0].block_col));
                for (int k = 1; k < n_keys; ++k)
                    sk = make_binary(
                        BinOp::Add, make_binary(BinOp::Mul, std::move(sk), make_number(base)),
                        make_ref(fac.cell("Where", lrow, plan.rank_cols[k].block_col)));
                sk = make_binary(BinOp::Add,
                                 make_binary(BinOp::Mul, std::move(sk), make_number(base)),
                                 make_ref(fac.cell("Where", lrow, blk.seq_col)));
                put(where, fac.cell("Where", lrow, *plan.sk_col), std::move(sk));
                put(where, fac.cell("Where", lrow, *plan.sk_rank_col),
                    make_call(Builtin::RankEq,
                              {make_ref(fac.cell("Where", lrow, *plan.sk_col)),
                               make_name("SK"), make_number(1)}));
            }
        }
    }

    Sheet& osheet = wb.add_sheet("Ordered");
    ExtractionBlock oblk;
    oblk.sheet = "Ordered";
    oblk.n_slots = n;
    oblk.seq_col = 1;
    oblk.rownum_col = 2;
    oblk.n_projected = blk.n_projected;
    for (int p = 0; p < blk.n_projected; ++p)
        oblk.value_cols.push_back(
            {blk.value_cols[p].block_col, 3 + p, blk.value_cols[p].name});

    put(osheet, fac.cell("Ordered", header, oblk.seq_col), std::string("NoSeq"));
    put(osheet, fac.cell("Ordered", header, oblk.rownum_col), std::string("Row Num"));
    for (const ValueColumn& vc : oblk.value_cols)
        put(osheet, fac.cell("Ordered", header, vc.block_col), vc.name);

    std::string match_range_name = with_sk ? "SK_Rank" : "KeyRank_1";
    for (int s = 0; s < n; ++s) {
        int lrow = data_start + s;
        CellAddr seq = fac.cell("Ordered", lrow, oblk.seq_col);
        put(osheet, seq, static_cast<double>(s + 1));
        CellAddr rownum = fac.cell("Ordered", lrow, oblk.rownum_col);
        put(osheet, rownum,
            make_call(Builtin::Match,
                      {make_ref(seq), make_name(match_range_name), make_number(0)}));
        for (const ValueColumn& vc : oblk.value_cols) {
            CellRange where_span = fac.column_span("Where", vc.source_col, data_start, data_end);
            put(osheet, fac.cell("Ordered", lrow, vc.block_col),
                make_call(Builtin::Index, {make_range(where_span), make_ref(rownum)}));
        }
    }
    plan.order_block = std::move(oblk);

    return {std::move(wb), std::move(plan)};
}

} // namespace sheetql
