#include "sheetql/engine.hpp"

#include "sheetql/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>

namespace sheetql {

// ---------------------------------------------------------------- builtins

Value fn_if(const Value& cond, const Value& then_v, const Value& else_v) {
    if (cond.is_error())
        return cond;
    if (cond.is_bool())
        return cond.as_bool() ? then_v : else_v;
    if (cond.is_number())
        return cond.as_number() != 0 ? then_v : else_v;
    return Value::error(ErrorKind::Value);
}

namespace {

// Same-kind exact equality used by MATCH: numbers compare exactly, text
// case-insensitively; mismatched kinds and error elements never match.
bool match_equal(const Value& needle, const Value& elem) {
    if (needle.is_number() && elem.is_number())
        return needle.as_number() == elem.as_number();
    if (needle.is_text() && elem.is_text())
        return text_equal_ci(needle.as_text(), elem.as_text());
    if (needle.is_bool() && elem.is_bool())
        return needle.as_bool() == elem.as_bool();
    return false;
}

} // namespace

Value fn_match_exact(const Value& needle, const std::vector<Value>& range) {
    if (needle.is_error())
        return needle;
    for (size_t i = 0; i < range.size(); ++i)
        if (match_equal(needle, range[i]))
            return Value::number(static_cast<double>(i + 1));
    return Value::error(ErrorKind::Na);
}

Value fn_index(const std::vector<Value>& range, const Value& n) {
    if (n.is_error())
        return n;
    if (!n.is_number())
        return Value::error(ErrorKind::Value);
    double truncated = std::trunc(n.as_number());
    if (truncated < 1 || truncated > static_cast<double>(range.size()))
        return Value::error(ErrorKind::Ref);
    return range[static_cast<size_t>(truncated) - 1];
}

Value fn_rank_eq(const Value& x, const std::vector<Value>& range, const Value& order) {
    if (x.is_error())
        return x;
    if (order.is_error())
        return order;
    if (!x.is_number() || !order.is_number())
        return Value::error(ErrorKind::Value);
    bool descending = order.as_number() == 0;
    double v = x.as_number();
    int better = 0;
    bool present = false;
    for (const Value& elem : range) {
        if (!elem.is_number())
            continue;
        double e = elem.as_number();
        if (e == v)
            present = true;
        else if (descending ? e > v : e < v)
            ++better;
    }
    if (!present)
        return Value::error(ErrorKind::Na);
    return Value::number(better + 1);
}

Value eval_binary(BinOp op, const Value& l, const Value& r) {
    switch (op) {
    case BinOp::Eq: return eval_compare(CmpOp::Eq, l, r);
    case BinOp::Ne: return eval_compare(CmpOp::Ne, l, r);
    case BinOp::Lt: return eval_compare(CmpOp::Lt, l, r);
    case BinOp::Le: return eval_compare(CmpOp::Le, l, r);
    case BinOp::Gt: return eval_compare(CmpOp::Gt, l, r);
    case BinOp::Ge: return eval_compare(CmpOp::Ge, l, r);
    default: break;
    }
    if (l.is_error())
        return l;
    if (r.is_error())
        return r;
    if (op == BinOp::Concat)
        return Value::text(l.display() + r.display());
    if (!l.is_number() || !r.is_number())
        return Value::error(ErrorKind::Value);
    double a = l.as_number(), b = r.as_number();
    switch (op) {
    case BinOp::Add: return Value::number(a + b);
    case BinOp::Sub: return Value::number(a - b);
    case BinOp::Mul: return Value::number(a * b);
    case BinOp::Div:
        if (b == 0)
            return Value::error(ErrorKind::Div0);
        return Value::number(a / b);
    default: break;
    }
    return Value::error(ErrorKind::Value);
}

// -------------------------------------------------------------- value grid

const std::optional<Value>& SheetValues::at(int row, int col) const {
    static const std::optional<Value> empty;
    if (row < 1 || row > n_rows || col < 1 || col > n_cols)
        return empty;
    return slots[static_cast<size_t>(row - 1) * n_cols + (col - 1)];
}

std::optional<Value> ValueGrid::find(const CellAddr& addr) const {
    auto it = sheets.find(addr.sheet);
    if (it == sheets.end())
        return std::nullopt;
    return it->second.at(addr.row, addr.col);
}

Value ValueGrid::read(const CellAddr& addr) const {
    auto v = find(addr);
    return v ? *v : Value::number(0);
}

// ------------------------------------------------------ dependency ordering

namespace {

struct SheetIndex {
    std::string name;
    const Sheet* sheet = nullptr;
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int32_t> node_at; // formula-cell node id per (row,col), -1 otherwise
};

struct DepGraph {
    std::vector<CellAddr> node_addr;   // node id -> address
    std::vector<const Expr*> node_expr;
    std::vector<uint64_t> node_key;    // packed (sheet, row, col) for tie-breaks
    std::vector<std::vector<int32_t>> dependents;
    std::vector<int32_t> in_degree;
    std::vector<SheetIndex> sheets;    // sorted by name (map order)
    std::map<std::string, int> sheet_id;
};

uint64_t pack_key(int sheet_id, int row, int col) {
    return (static_cast<uint64_t>(sheet_id) << 40) | (static_cast<uint64_t>(row) << 16) |
           static_cast<uint64_t>(col);
}

int32_t node_of(const DepGraph& g, const std::string& sheet, int row, int col) {
    auto it = g.sheet_id.find(sheet);
    if (it == g.sheet_id.end())
        return -1;
    const SheetIndex& si = g.sheets[it->second];
    if (row < 1 || row > si.n_rows || col < 1 || col > si.n_cols)
        return -1;
    return si.node_at[static_cast<size_t>(row - 1) * si.n_cols + (col - 1)];
}

// Appends the formula-cell node ids referenced by e to deps. Name targets
// resolve through wb.names; unresolvable names contribute no edges (the
// cell evaluates to #NAME? regardless of order).
void collect_deps(const DepGraph& g, const Workbook& wb, const Expr& e,
                  std::vector<int32_t>& deps) {
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, CellRef>) {
                int32_t id = node_of(g, node.addr.sheet, node.addr.row, node.addr.col);
                if (id >= 0)
                    deps.push_back(id);
            } else if constexpr (std::is_same_v<T, RangeRef>) {
                for (int r = node.range.row_start; r <= node.range.row_end; ++r)
                    for (int c = node.range.col_start; c <= node.range.col_end; ++c) {
                        int32_t id = node_of(g, node.range.sheet, r, c);
                        if (id >= 0)
                            deps.push_back(id);
                    }
            } else if constexpr (std::is_same_v<T, NameRef>) {
                auto it = wb.names.find(node.name);
                if (it == wb.names.end())
                    return;
                if (const auto* addr = std::get_if<CellAddr>(&it->second)) {
                    int32_t id = node_of(g, addr->sheet, addr->row, addr->col);
                    if (id >= 0)
                        deps.push_back(id);
                } else {
                    const auto& range = std::get<CellRange>(it->second);
                    for (int r = range.row_start; r <= range.row_end; ++r)
                        for (int c = range.col_start; c <= range.col_end; ++c) {
                            int32_t id = node_of(g, range.sheet, r, c);
                            if (id >= 0)
                                deps.push_back(id);
                        }
                }
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect_deps(g, wb, *node.lhs, deps);
                collect_deps(g, wb, *node.rhs, deps);
            } else if constexpr (std::is_same_v<T, Call>) {
                for (const auto& arg : node.args)
                    collect_deps(g, wb, *arg, deps);
            }
        },
        e);
}

DepGraph build_graph(const Workbook& wb) {
    DepGraph g;
    for (const auto& [name, sheet] : wb.sheets) {
        SheetIndex si;
        si.name = name;
        si.sheet = &sheet;
        si.n_rows = sheet.max_row();
        si.n_cols = sheet.max_col();
        si.node_at.assign(static_cast<size_t>(si.n_rows) * si.n_cols, -1);
        g.sheet_id[name] = static_cast<int>(g.sheets.size());
        g.sheets.push_back(std::move(si));
    }
    // Sheets iterate in name order and cells in (row, col) order, so node ids
    // are already sorted by the deterministic tie-break key.
    for (size_t s = 0; s < g.sheets.size(); ++s) {
        SheetIndex& si = g.sheets[s];
        for (const auto& [pos, cell] : si.sheet->cells) {
            if (!cell.is_formula())
                continue;
            auto [row, col] = pos;
            int32_t id = static_cast<int32_t>(g.node_addr.size());
            si.node_at[static_cast<size_t>(row - 1) * si.n_cols + (col - 1)] = id;
            g.node_addr.push_back(CellAddr{si.name, col, row});
            g.node_expr.push_back(std::get<ExprPtr>(cell.content).get());
            g.node_key.push_back(pack_key(static_cast<int>(s), row, col));
        }
    }
    size_t n = g.node_addr.size();
    g.dependents.resize(n);
    g.in_degree.assign(n, 0);
    std::vector<int32_t> deps;
    for (size_t id = 0; id < n; ++id) {
        deps.clear();
        collect_deps(g, wb, *g.node_expr[id], deps);
        for (int32_t dep : deps) {
            g.dependents[dep].push_back(static_cast<int32_t>(id));
            ++g.in_degree[id];
        }
    }
    return g;
}

// Iterative Tarjan over the nodes still unprocessed after the first Kahn
// pass; returns the ids that sit on an actual cycle (SCC of size > 1, or a
// self-loop).
std::vector<int32_t> cycle_nodes(const DepGraph& g, const std::vector<bool>& done) {
    size_t n = g.node_addr.size();
    std::vector<int32_t> index(n, -1), lowlink(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<int32_t> stack;
    std::vector<int32_t> result;
    int32_t next_index = 0;

    struct Frame {
        int32_t v;
        size_t edge = 0;
    };
    std::vector<Frame> frames;

    for (size_t start = 0; start < n; ++start) {
        if (done[start] || index[start] >= 0)
            continue;
        frames.push_back({static_cast<int32_t>(start), 0});
        while (!frames.empty()) {
            Frame& f = frames.back();
            int32_t v = f.v;
            if (f.edge == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            bool descended = false;
            while (f.edge < g.dependents[v].size()) {
                int32_t w = g.dependents[v][f.edge++];
                if (done[w])
                    continue;
                if (index[w] < 0) {
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w])
                    lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended)
                continue;
            if (lowlink[v] == index[v]) {
                // Root of an SCC: pop it and keep it if it is a real cycle.
                std::vector<int32_t> scc;
                while (true) {
                    int32_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    scc.push_back(w);
                    if (w == v)
                        break;
                }
                bool is_cycle = scc.size() > 1;
                if (!is_cycle)
                    for (int32_t w : g.dependents[v])
                        if (w == v)
                            is_cycle = true;
                if (is_cycle)
                    result.insert(result.end(), scc.begin(), scc.end());
            }
            frames.pop_back();
            if (!frames.empty()) {
                Frame& parent = frames.back();
                lowlink[parent.v] = std::min(lowlink[parent.v], lowlink[v]);
            }
        }
    }
    std::sort(result.begin(), result.end());
    return result;
}

struct OrderResult {
    std::vector<int32_t> order;
    std::vector<int32_t> cycles;
};

OrderResult order_nodes(const DepGraph& g) {
    size_t n = g.node_addr.size();
    OrderResult out;
    out.order.reserve(n);
    std::vector<int32_t> degree = g.in_degree;
    std::vector<bool> done(n, false);

    using HeapEntry = std::pair<uint64_t, int32_t>;
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> ready;
    for (size_t id = 0; id < n; ++id)
        if (degree[id] == 0)
            ready.push({g.node_key[id], static_cast<int32_t>(id)});

    auto drain = [&] {
        while (!ready.empty()) {
            auto [key, id] = ready.top();
            ready.pop();
            done[id] = true;
            out.order.push_back(id);
            for (int32_t dep : g.dependents[id])
                if (--degree[dep] == 0)
                    ready.push({g.node_key[dep], dep});
        }
    };

    drain();
    if (out.order.size() < n) {
        out.cycles = cycle_nodes(g, done);
        // Cycle members are assigned rather than computed; releasing them
        // unblocks everything downstream, which then evaluates normally.
        for (int32_t id : out.cycles) {
            done[id] = true;
            out.order.push_back(id);
        }
        for (int32_t id : out.cycles)
            for (int32_t dep : g.dependents[id])
                if (--degree[dep] == 0 && !done[dep])
                    ready.push({g.node_key[dep], dep});
        drain();
    }
    return out;
}

} // namespace

EvalOrder build_eval_order(const Workbook& wb) {
    DepGraph g = build_graph(wb);
    OrderResult r = order_nodes(g);
    EvalOrder out;
    out.order.reserve(r.order.size());
    for (int32_t id : r.order)
        out.order.push_back(g.node_addr[id]);
    out.cycle_cells.reserve(r.cycles.size());
    for (int32_t id : r.cycles)
        out.cycle_cells.push_back(g.node_addr[id]);
    return out;
}

// --------------------------------------------------------------- evaluate

namespace {

struct EvalContext {
    const Workbook& wb;
    const DepGraph& g;
    const std::map<const void*, Value>* param_override; // param cell -> value
    std::vector<Value>& computed;                       // by node id
    std::vector<bool>& have;

    Value value_of(const std::string& sheet, int row, int col) const {
        auto sit = wb.sheets.find(sheet);
        if (sit == wb.sheets.end())
            return Value::number(0);
        const Cell* cell = sit->second.find(row, col);
        if (!cell)
            return Value::number(0);
        if (param_override) {
            auto oit = param_override->find(cell);
            if (oit != param_override->end())
                return oit->second;
        }
        if (const auto* num = std::get_if<double>(&cell->content))
            return Value::number(*num);
        if (const auto* text = std::get_if<std::string>(&cell->content))
            return Value::text(*text);
        int32_t id = node_of(g, sheet, row, col);
        if (id >= 0 && have[id])
            return computed[id];
        // Unreachable under a correct evaluation order; defensive.
        return Value::error(ErrorKind::Circ);
    }

    std::vector<Value> range_values(const CellRange& range) const {
        std::vector<Value> out;
        out.reserve(static_cast<size_t>(range.size()));
        for (int r = range.row_start; r <= range.row_end; ++r)
            for (int c = range.col_start; c <= range.col_end; ++c)
                out.push_back(value_of(range.sheet, r, c));
        return out;
    }
};

// A range-shaped argument: a range literal, a single cell, or a name bound
// to either. Returns false when the expression is not range-shaped.
bool resolve_range_arg(const EvalContext& ctx, const Expr& e, CellRange& out) {
    if (const auto* range = std::get_if<RangeRef>(&e)) {
        out = range->range;
        return true;
    }
    if (const auto* ref = std::get_if<CellRef>(&e)) {
        out = CellRange{ref->addr.sheet, ref->addr.col, ref->addr.row, ref->addr.col,
                        ref->addr.row};
        return true;
    }
    if (const auto* name = std::get_if<NameRef>(&e)) {
        auto it = ctx.wb.names.find(name->name);
        if (it == ctx.wb.names.end())
            return false;
        if (const auto* addr = std::get_if<CellAddr>(&it->second)) {
            out = CellRange{addr->sheet, addr->col, addr->row, addr->col, addr->row};
        } else {
            out = std::get<CellRange>(it->second);
        }
        return true;
    }
    return false;
}

Value eval_expr(const EvalContext& ctx, const Expr& e);

// MATCH/INDEX/RANK.EQ take one range argument in a fixed position; the
// range must be a single row or column.
Value eval_range_call(const EvalContext& ctx, const Call& call, size_t range_pos) {
    CellRange range;
    if (!resolve_range_arg(ctx, *call.args[range_pos], range)) {
        // A name that resolves to nothing is #NAME?; any other non-range
        // argument shape is a #VALUE! misuse.
        if (const auto* name = std::get_if<NameRef>(call.args[range_pos].get()))
            if (!ctx.wb.names.count(name->name))
                return Value::error(ErrorKind::Name);
        return Value::error(ErrorKind::Value);
    }
    if (!range.single_row() && !range.single_column())
        return Value::error(ErrorKind::Value);
    std::vector<Value> elems = ctx.range_values(range);

    switch (call.fn) {
    case Builtin::Match: {
        Value needle = eval_expr(ctx, *call.args[0]);
        Value mtype = eval_expr(ctx, *call.args[2]);
        if (needle.is_error())
            return needle;
        if (mtype.is_error())
            return mtype;
        if (!mtype.is_number() || mtype.as_number() != 0)
            return Value::error(ErrorKind::Value); // only exact match exists here
        return fn_match_exact(needle, elems);
    }
    case Builtin::Index: {
        Value n = eval_expr(ctx, *call.args[1]);
        return fn_index(elems, n);
    }
    case Builtin::RankEq: {
        Value x = eval_expr(ctx, *call.args[0]);
        Value order = eval_expr(ctx, *call.args[2]);
        return fn_rank_eq(x, elems, order);
    }
    default:
        return Value::error(ErrorKind::Value);
    }
}

Value eval_expr(const EvalContext& ctx, const Expr& e) {
    return std::visit(
        [&](const auto& node) -> Value {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NumberLit>) {
                return Value::number(node.value);
            } else if constexpr (std::is_same_v<T, TextLit>) {
                return Value::text(node.value);
            } else if constexpr (std::is_same_v<T, CellRef>) {
                return ctx.value_of(node.addr.sheet, node.addr.row, node.addr.col);
            } else if constexpr (std::is_same_v<T, RangeRef>) {
                // A bare range has no scalar value.
                return Value::error(ErrorKind::Value);
            } else if constexpr (std::is_same_v<T, NameRef>) {
                auto it = ctx.wb.names.find(node.name);
                if (it == ctx.wb.names.end())
                    return Value::error(ErrorKind::Name);
                if (const auto* addr = std::get_if<CellAddr>(&it->second))
                    return ctx.value_of(addr->sheet, addr->row, addr->col);
                const auto& range = std::get<CellRange>(it->second);
                if (range.size() == 1)
                    return ctx.value_of(range.sheet, range.row_start, range.col_start);
                return Value::error(ErrorKind::Value);
            } else if constexpr (std::is_same_v<T, Binary>) {
                Value l = eval_expr(ctx, *node.lhs);
                Value r = eval_expr(ctx, *node.rhs);
                return eval_binary(node.op, l, r);
            } else {
                static_assert(std::is_same_v<T, Call>);
                if (node.fn == Builtin::If) {
                    Value cond = eval_expr(ctx, *node.args[0]);
                    Value then_v = eval_expr(ctx, *node.args[1]);
                    Value else_v = eval_expr(ctx, *node.args[2]);
                    return fn_if(cond, then_v, else_v);
                }
                size_t range_pos = node.fn == Builtin::Index ? 0 : 1;
                return eval_range_call(ctx, node, range_pos);
            }
        },
        e);
}

} // namespace

ValueGrid evaluate(const Workbook& wb, const std::map<std::string, Value>& overrides) {
    // Precondition: overrides name declared params only.
    std::map<const void*, Value> override_cells;
    for (const auto& [name, value] : overrides) {
        auto it = wb.params.find(name);
        if (it == wb.params.end())
            fail(Errc::UnknownParam, "override of undeclared parameter: " + name);
        const Sheet* sheet = wb.find_sheet(it->second.sheet);
        const Cell* cell = sheet ? sheet->find(it->second.row, it->second.col) : nullptr;
        if (!cell)
            fail(Errc::UnknownParam, "parameter cell missing for: " + name);
        override_cells[cell] = value;
    }

    DepGraph g = build_graph(wb);
    OrderResult order = order_nodes(g);

    std::vector<Value> computed(g.node_addr.size(), Value::number(0));
    std::vector<bool> have(g.node_addr.size(), false);
    EvalContext ctx{wb, g, override_cells.empty() ? nullptr : &override_cells, computed, have};

    std::vector<bool> in_cycle(g.node_addr.size(), false);
    for (int32_t id : order.cycles)
        in_cycle[id] = true;

    for (int32_t id : order.order) {
        computed[id] = in_cycle[id] ? Value::error(ErrorKind::Circ)
                                    : eval_expr(ctx, *g.node_expr[id]);
        have[id] = true;
    }

    ValueGrid grid;
    for (const auto& si : g.sheets) {
        SheetValues sv;
        sv.n_rows = si.n_rows;
        sv.n_cols = si.n_cols;
        sv.slots.assign(static_cast<size_t>(si.n_rows) * si.n_cols, std::nullopt);
        for (const auto& [pos, cell] : si.sheet->cells) {
            auto [row, col] = pos;
            size_t slot = static_cast<size_t>(row - 1) * si.n_cols + (col - 1);
            Value v = ctx.value_of(si.name, row, col);
            sv.slots[slot] = std::move(v);
        }
        grid.sheets.emplace(si.name, std::move(sv));
    }
    return grid;
}

} // namespace sheetql
