#include "sheetql/query.hpp"

#include "sheetql/errors.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace sheetql {

namespace {

// ---------------------------------------------------------------- lexer

enum class TokKind { Ident, QuotedIdent, Text, Number, Comma, LParen, RParen, Cmp, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;   // identifier / literal text
    double number = 0;
    CmpOp op = CmpOp::Eq;
    size_t pos = 0;
};

[[noreturn]] void syntax_fail(size_t pos, const std::string& msg) {
    fail(Errc::SyntaxError, "at offset " + std::to_string(pos) + ": " + msg);
}

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Token> lex(std::string_view text) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.pos = i;
        if (ident_start(c)) {
            size_t b = i;
            while (i < text.size() && ident_char(text[i])) {
                ++i;
            }
            t.kind = TokKind::Ident;
            t.text = std::string(text.substr(b, i - b));
        } else if (c == '"') {
            ++i;
            t.kind = TokKind::QuotedIdent;
            while (true) {
                if (i >= text.size()) {
                    syntax_fail(t.pos, "unterminated quoted identifier");
                }
                if (text[i] == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        t.text.push_back('"');
                        i += 2;
                    } else {
                        ++i;
                        break;
                    }
                } else {
                    t.text.push_back(text[i]);
                    ++i;
                }
            }
        } else if (c == '\'') {
            ++i;
            t.kind = TokKind::Text;
            while (true) {
                if (i >= text.size()) {
                    syntax_fail(t.pos, "unterminated text literal");
                }
                if (text[i] == '\'') {
                    if (i + 1 < text.size() && text[i + 1] == '\'') {
                        t.text.push_back('\'');
                        i += 2;
                    } else {
                        ++i;
                        break;
                    }
                } else {
                    t.text.push_back(text[i]);
                    ++i;
                }
            }
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.'
                   || ((c == '-' || c == '+')
                       && i + 1 < text.size()
                       && (std::isdigit(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '.'))) {
            size_t b = i;
            if (c == '-' || c == '+') {
                ++i;
            }
            while (i < text.size()
                   && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
                ++i;
            }
            if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
                size_t save = i;
                ++i;
                if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
                    ++i;
                }
                if (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                        ++i;
                    }
                } else {
                    i = save;
                }
            }
            auto parsed = parse_decimal(text.substr(b, i - b));
            if (!parsed) {
                syntax_fail(b, "malformed number");
            }
            t.kind = TokKind::Number;
            t.number = *parsed;
        } else if (c == ',') {
            t.kind = TokKind::Comma;
            ++i;
        } else if (c == '(') {
            t.kind = TokKind::LParen;
            ++i;
        } else if (c == ')') {
            t.kind = TokKind::RParen;
            ++i;
        } else if (c == '=') {
            t.kind = TokKind::Cmp;
            t.op = CmpOp::Eq;
            ++i;
        } else if (c == '<') {
            t.kind = TokKind::Cmp;
            if (i + 1 < text.size() && text[i + 1] == '>') {
                t.op = CmpOp::Ne;
                i += 2;
            } else if (i + 1 < text.size() && text[i + 1] == '=') {
                t.op = CmpOp::Le;
                i += 2;
            } else {
                t.op = CmpOp::Lt;
                ++i;
            }
        } else if (c == '>') {
            t.kind = TokKind::Cmp;
            if (i + 1 < text.size() && text[i + 1] == '=') {
                t.op = CmpOp::Ge;
                i += 2;
            } else {
                t.op = CmpOp::Gt;
                ++i;
            }
        } else {
            syntax_fail(i, std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.pos = text.size();
    out.push_back(end);
    return out;
}

bool is_keyword(const Token& t, std::string_view kw) {
    return t.kind == TokKind::Ident && text_equal_ci(t.text, kw);
}

bool is_any_keyword(const Token& t) {
    static const char* kws[] = {"select", "from", "where", "order", "by",
                                "asc", "desc", "and", "or", "not"};
    if (t.kind != TokKind::Ident) {
        return false;
    }
    return std::any_of(std::begin(kws), std::end(kws),
                       [&](const char* k) { return text_equal_ci(t.text, k); });
}

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(lex(text)) {}

    Query parse() {
        Query q;
        expect_keyword("SELECT");
        if (is_keyword(peek(), "FROM") || peek().kind == TokKind::End) {
            fail(Errc::EmptyProjection, "SELECT list is empty");
        }
        q.projection.push_back(column_name());
        while (peek().kind == TokKind::Comma) {
            advance();
            q.projection.push_back(column_name());
        }
        expect_keyword("FROM");
        q.source = identifier("table name");
        if (is_keyword(peek(), "WHERE")) {
            advance();
            q.predicate = or_expr();
        }
        if (is_keyword(peek(), "ORDER")) {
            advance();
            expect_keyword("BY");
            q.order_keys.push_back(order_key());
            while (peek().kind == TokKind::Comma) {
                advance();
                q.order_keys.push_back(order_key());
            }
            std::set<std::string> seen;
            for (const OrderKey& k : q.order_keys) {
                if (!seen.insert(k.column).second) {
                    fail(Errc::DuplicateOrderColumn,
                         "column '" + k.column + "' appears twice in ORDER BY");
                }
            }
        }
        if (peek().kind != TokKind::End) {
            syntax_fail(peek().pos, "trailing input after statement");
        }
        return q;
    }

private:
    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_++]; }

    void expect_keyword(std::string_view kw) {
        if (!is_keyword(peek(), kw)) {
            syntax_fail(peek().pos, "expected " + std::string(kw));
        }
        advance();
    }

    std::string identifier(const std::string& what) {
        const Token& t = peek();
        if (t.kind == TokKind::QuotedIdent) {
            advance();
            return t.text;
        }
        if (t.kind == TokKind::Ident && !is_any_keyword(t)) {
            advance();
            return t.text;
        }
        syntax_fail(t.pos, "expected " + what);
    }

    std::string column_name() { return identifier("column name"); }

    OrderKey order_key() {
        OrderKey k;
        k.column = column_name();
        if (is_keyword(peek(), "ASC")) {
            advance();
        } else if (is_keyword(peek(), "DESC")) {
            advance();
            k.direction = SortDir::Descending;
        }
        return k;
    }

    PredPtr or_expr() {
        PredPtr left = and_expr();
        while (is_keyword(peek(), "OR")) {
            advance();
            left = std::make_shared<PredNode>(OrNode{left, and_expr()});
        }
        return left;
    }

    PredPtr and_expr() {
        PredPtr left = not_expr();
        while (is_keyword(peek(), "AND")) {
            advance();
            left = std::make_shared<PredNode>(AndNode{left, not_expr()});
        }
        return left;
    }

    PredPtr not_expr() {
        if (is_keyword(peek(), "NOT")) {
            advance();
            return std::make_shared<PredNode>(NotNode{not_expr()});
        }
        return primary();
    }

    PredPtr primary() {
        if (peek().kind == TokKind::LParen) {
            advance();
            PredPtr inner = or_expr();
            if (peek().kind != TokKind::RParen) {
                syntax_fail(peek().pos, "expected )");
            }
            advance();
            return inner;
        }
        Comparison cmp;
        cmp.column = column_name();
        if (peek().kind != TokKind::Cmp) {
            syntax_fail(peek().pos, "expected comparison operator");
        }
        cmp.op = advance().op;
        const Token& rhs = peek();
        if (rhs.kind == TokKind::Number) {
            cmp.rhs = rhs.number;
            advance();
        } else if (rhs.kind == TokKind::Text) {
            cmp.rhs = rhs.text;
            advance();
        } else if (rhs.kind == TokKind::Ident || rhs.kind == TokKind::QuotedIdent) {
            cmp.rhs = ColumnOperand{identifier("column name")};
        } else {
            syntax_fail(rhs.pos, "expected literal or column");
        }
        return std::make_shared<PredNode>(std::move(cmp));
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

} // namespace

Query parse_query(std::string_view text) {
    return Parser(text).parse();
}

// ---------------------------------------------------------------- renderer

namespace {

bool bare_identifier_ok(const std::string& s) {
    if (s.empty() || !ident_start(s[0])) {
        return false;
    }
    if (!std::all_of(s.begin(), s.end(), ident_char)) {
        return false;
    }
    Token t;
    t.kind = TokKind::Ident;
    t.text = s;
    return !is_any_keyword(t);
}

std::string render_identifier(const std::string& s) {
    if (bare_identifier_ok(s)) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string render_text_literal(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "''";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('\'');
    return out;
}

// Precedence levels: OR = 1, AND = 2, NOT = 3, comparison = 4.
void render_pred(const PredNode& node, int min_prec, std::string& out) {
    if (const auto* cmp = std::get_if<Comparison>(&node)) {
        out += render_identifier(cmp->column);
        out += ' ';
        out += cmp_op_text(cmp->op);
        out += ' ';
        if (const double* d = std::get_if<double>(&cmp->rhs)) {
            out += canonical_number(*d);
        } else if (const std::string* s = std::get_if<std::string>(&cmp->rhs)) {
            out += render_text_literal(*s);
        } else if (const auto* col = std::get_if<ColumnOperand>(&cmp->rhs)) {
            out += render_identifier(col->name);
        } else {
            // Lifted parameter slots render as bare names; they only appear
            // in diagnostics, never in re-parseable query text.
            out += std::get<ParamRef>(cmp->rhs).name;
        }
        return;
    }
    int prec = 0;
    if (std::holds_alternative<OrNode>(node)) {
        prec = 1;
    } else if (std::holds_alternative<AndNode>(node)) {
        prec = 2;
    } else {
        prec = 3;
    }
    bool parens = prec < min_prec;
    if (parens) {
        out.push_back('(');
    }
    if (const auto* o = std::get_if<OrNode>(&node)) {
        render_pred(*o->lhs, 1, out);
        out += " OR ";
        render_pred(*o->rhs, 2, out);
    } else if (const auto* a = std::get_if<AndNode>(&node)) {
        render_pred(*a->lhs, 2, out);
        out += " AND ";
        render_pred(*a->rhs, 3, out);
    } else {
        out += "NOT ";
        render_pred(*std::get<NotNode>(node).child, 3, out);
    }
    if (parens) {
        out.push_back(')');
    }
}

} // namespace

std::string render_query(const Query& q) {
    std::string out = "SELECT ";
    for (size_t i = 0; i < q.projection.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += render_identifier(q.projection[i]);
    }
    out += " FROM ";
    out += render_identifier(q.source);
    if (q.predicate) {
        out += " WHERE ";
        render_pred(*q.predicate, 0, out);
    }
    if (!q.order_keys.empty()) {
        out += " ORDER BY ";
        for (size_t i = 0; i < q.order_keys.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += render_identifier(q.order_keys[i].column);
            if (q.order_keys[i].direction == SortDir::Descending) {
                out += " DESC";
            }
        }
    }
    return out;
}

bool pred_equal(const PredPtr& a, const PredPtr& b) {
    if (!a || !b) {
        return !a && !b;
    }
    if (a->index() != b->index()) {
        return false;
    }
    if (const auto* ca = std::get_if<Comparison>(a.get())) {
        const auto* cb = std::get_if<Comparison>(b.get());
        return ca->column == cb->column && ca->op == cb->op && ca->rhs == cb->rhs;
    }
    if (const auto* aa = std::get_if<AndNode>(a.get())) {
        const auto* ab = std::get_if<AndNode>(b.get());
        return pred_equal(aa->lhs, ab->lhs) && pred_equal(aa->rhs, ab->rhs);
    }
    if (const auto* oa = std::get_if<OrNode>(a.get())) {
        const auto* ob = std::get_if<OrNode>(b.get());
        return pred_equal(oa->lhs, ob->lhs) && pred_equal(oa->rhs, ob->rhs);
    }
    return pred_equal(std::get<NotNode>(*a).child, std::get<NotNode>(*b).child);
}

bool query_equal(const Query& a, const Query& b) {
    return a.projection == b.projection && a.source == b.source
        && a.order_keys == b.order_keys && pred_equal(a.predicate, b.predicate);
}

// ---------------------------------------------------------------- binder

namespace {

int resolve_column(const Table& table, const std::string& name) {
    if (auto idx = table.find_column(name)) {
        return *idx;
    }
    fail(Errc::UnknownColumn, "no column '" + name + "' in table '" + table.name + "'");
}

BoundPredPtr bind_pred(const PredNode& node, const Table& table) {
    if (const auto* cmp = std::get_if<Comparison>(&node)) {
        BComparison out;
        out.column = resolve_column(table, cmp->column);
        out.op = cmp->op;
        ColType lhs_type = table.columns[out.column - 1].type;
        ColType rhs_type;
        if (const double* d = std::get_if<double>(&cmp->rhs)) {
            out.rhs = *d;
            rhs_type = ColType::Number;
        } else if (const std::string* s = std::get_if<std::string>(&cmp->rhs)) {
            out.rhs = *s;
            rhs_type = ColType::Text;
        } else if (const auto* col = std::get_if<ColumnOperand>(&cmp->rhs)) {
            int rhs_col = resolve_column(table, col->name);
            out.rhs = rhs_col;
            rhs_type = table.columns[rhs_col - 1].type;
        } else {
            fail(Errc::SyntaxError, "parameter slots cannot appear in a query being bound");
        }
        if (lhs_type != rhs_type) {
            if (out.op == CmpOp::Eq) {
                return std::make_shared<BoundPred>(BConst{false});
            }
            if (out.op == CmpOp::Ne) {
                return std::make_shared<BoundPred>(BConst{true});
            }
            fail(Errc::TypeMismatchOrdering, "cannot order-compare column '"
                + cmp->column + "' against a value of the other type");
        }
        return std::make_shared<BoundPred>(std::move(out));
    }
    if (const auto* a = std::get_if<AndNode>(&node)) {
        return std::make_shared<BoundPred>(BAnd{bind_pred(*a->lhs, table), bind_pred(*a->rhs, table)});
    }
    if (const auto* o = std::get_if<OrNode>(&node)) {
        return std::make_shared<BoundPred>(BOr{bind_pred(*o->lhs, table), bind_pred(*o->rhs, table)});
    }
    return std::make_shared<BoundPred>(BNot{bind_pred(*std::get<NotNode>(node).child, table)});
}

} // namespace

BoundQuery bind_query(const Query& query, const Table& table) {
    BoundQuery bq;
    bq.query = query;
    for (const std::string& col : query.projection) {
        bq.projection.push_back(resolve_column(table, col));
    }
    if (query.predicate) {
        bq.predicate = bind_pred(*query.predicate, table);
    }
    for (const OrderKey& key : query.order_keys) {
        int idx = resolve_column(table, key.column);
        if (table.columns[idx - 1].type != ColType::Number) {
            fail(Errc::NonNumericOrderKey, "ORDER BY column '" + key.column
                + "' is not numeric");
        }
        bq.order_keys.push_back({idx, key.direction});
    }
    return bq;
}

bool eval_bound_pred(const BoundPred& pred, const std::vector<Scalar>& row) {
    if (const auto* cmp = std::get_if<BComparison>(&pred)) {
        Value lhs = scalar_to_value(row[cmp->column - 1]);
        Value rhs;
        if (const double* d = std::get_if<double>(&cmp->rhs)) {
            rhs = Value::number(*d);
        } else if (const std::string* s = std::get_if<std::string>(&cmp->rhs)) {
            rhs = Value::text(*s);
        } else {
            rhs = scalar_to_value(row[std::get<int>(cmp->rhs) - 1]);
        }
        Value r = eval_compare(cmp->op, lhs, rhs);
        return r.is_bool() && r.as_bool();
    }
    if (const auto* c = std::get_if<BConst>(&pred)) {
        return c->value;
    }
    if (const auto* a = std::get_if<BAnd>(&pred)) {
        return eval_bound_pred(*a->lhs, row) && eval_bound_pred(*a->rhs, row);
    }
    if (const auto* o = std::get_if<BOr>(&pred)) {
        return eval_bound_pred(*o->lhs, row) || eval_bound_pred(*o->rhs, row);
    }
    return !eval_bound_pred(*std::get<BNot>(pred).child, row);
}

} // namespace sheetql
