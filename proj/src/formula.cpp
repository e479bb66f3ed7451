#include "sheetql/formula.hpp"

#include "sheetql/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <utility>

namespace sheetql {

namespace {

bool is_ascii_alpha(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

bool is_ascii_digit(char c) {
    return c >= '0' && c <= '9';
}

bool is_ident_start(char c) {
    return is_ascii_alpha(c) || c == '_';
}

bool is_ident_char(char c) {
    return is_ascii_alpha(c) || is_ascii_digit(c) || c == '_' || c == '.';
}

// Letters-then-digits shape, e.g. "A1" or "XFE1048577". Used both for
// reference detection (with bounds checks) and for sheet-name quoting.
bool a1_shaped(std::string_view s) {
    size_t i = 0;
    while (i < s.size() && is_ascii_alpha(s[i]))
        ++i;
    if (i == 0 || i == s.size())
        return false;
    size_t j = i;
    while (j < s.size() && is_ascii_digit(s[j]))
        ++j;
    return j == s.size();
}

// Splits an A1-shaped token into a valid (col, row) pair, or returns false
// when either part is out of range for a real cell.
bool split_a1(std::string_view s, int& col, int& row) {
    if (!a1_shaped(s))
        return false;
    size_t i = 0;
    long long c = 0;
    while (i < s.size() && is_ascii_alpha(s[i])) {
        char u = static_cast<char>(std::toupper(static_cast<unsigned char>(s[i])));
        c = c * 26 + (u - 'A' + 1);
        if (c > kMaxCol)
            return false;
        ++i;
    }
    long long r = 0;
    while (i < s.size()) {
        r = r * 10 + (s[i] - '0');
        if (r > kMaxRow)
            return false;
        ++i;
    }
    if (c < 1 || r < 1)
        return false;
    col = static_cast<int>(c);
    row = static_cast<int>(r);
    return true;
}

bool needs_sheet_quotes(std::string_view name) {
    if (name.empty())
        return true;
    if (is_ascii_digit(name.front()))
        return true;
    for (char c : name)
        if (!(is_ascii_alpha(c) || is_ascii_digit(c) || c == '_'))
            return true;
    return a1_shaped(name);
}

std::string sheet_prefix(std::string_view name) {
    std::string out;
    if (needs_sheet_quotes(name)) {
        out += '\'';
        for (char c : name) {
            out += c;
            if (c == '\'')
                out += '\'';
        }
        out += '\'';
    } else {
        out.append(name);
    }
    out += '!';
    return out;
}

void check_addr(int col, int row) {
    if (col < 1 || col > kMaxCol || row < 1 || row > kMaxRow)
        fail(Errc::SyntaxError, "cell reference out of range");
}

} // namespace

std::string col_letters(int col) {
    if (col < 1 || col > kMaxCol)
        fail(Errc::SyntaxError, "column index out of range: " + std::to_string(col));
    std::string out;
    while (col > 0) {
        int rem = (col - 1) % 26;
        out += static_cast<char>('A' + rem);
        col = (col - 1) / 26;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

int col_from_letters(std::string_view letters) {
    if (letters.empty())
        return 0;
    long long c = 0;
    for (char ch : letters) {
        if (!is_ascii_alpha(ch))
            return 0;
        char u = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        c = c * 26 + (u - 'A' + 1);
        if (c > kMaxCol)
            return 0;
    }
    return static_cast<int>(c);
}

std::string render_a1(const CellAddr& addr) {
    check_addr(addr.col, addr.row);
    return sheet_prefix(addr.sheet) + col_letters(addr.col) + std::to_string(addr.row);
}

std::string render_a1(const CellRange& range) {
    check_addr(range.col_start, range.row_start);
    check_addr(range.col_end, range.row_end);
    std::string out = sheet_prefix(range.sheet);
    out += col_letters(range.col_start) + std::to_string(range.row_start);
    out += ':';
    out += col_letters(range.col_end) + std::to_string(range.row_end);
    return out;
}

namespace {

// Shared scanner for standalone A1 parsing: optional sheet prefix, then one
// or two col+row parts.
struct A1Scanner {
    std::string_view text;
    size_t pos = 0;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    std::string sheet_or_empty() {
        if (eof())
            return {};
        if (peek() == '\'') {
            ++pos;
            std::string name;
            while (true) {
                if (eof())
                    fail(Errc::SyntaxError, "unterminated sheet name quote");
                char c = text[pos++];
                if (c == '\'') {
                    if (!eof() && peek() == '\'') {
                        name += '\'';
                        ++pos;
                    } else {
                        break;
                    }
                } else {
                    name += c;
                }
            }
            if (eof() || peek() != '!')
                fail(Errc::SyntaxError, "expected '!' after sheet name");
            ++pos;
            return name;
        }
        // Bare sheet name only when a '!' follows a leading identifier.
        size_t save = pos;
        if (!is_ident_start(peek()))
            return {};
        size_t end = pos;
        while (end < text.size() && is_ident_char(text[end]))
            ++end;
        if (end < text.size() && text[end] == '!') {
            std::string name(text.substr(pos, end - pos));
            pos = end + 1;
            return name;
        }
        pos = save;
        return {};
    }

    void cell_part(int& col, int& row) {
        size_t end = pos;
        while (end < text.size() && is_ascii_alpha(text[end]))
            ++end;
        size_t digits = end;
        while (digits < text.size() && is_ascii_digit(text[digits]))
            ++digits;
        std::string_view token = text.substr(pos, digits - pos);
        if (!split_a1(token, col, row))
            fail(Errc::SyntaxError, "invalid cell reference: " + std::string(text));
        pos = digits;
    }
};

} // namespace

CellAddr parse_a1_addr(std::string_view text, std::string_view home_sheet) {
    A1Scanner sc{text};
    std::string sheet = sc.sheet_or_empty();
    if (sheet.empty())
        sheet = std::string(home_sheet);
    CellAddr addr;
    addr.sheet = sheet;
    sc.cell_part(addr.col, addr.row);
    if (!sc.eof())
        fail(Errc::SyntaxError, "trailing input in cell reference: " + std::string(text));
    return addr;
}

CellRange parse_a1_range(std::string_view text, std::string_view home_sheet) {
    A1Scanner sc{text};
    std::string sheet = sc.sheet_or_empty();
    if (sheet.empty())
        sheet = std::string(home_sheet);
    CellRange range;
    range.sheet = sheet;
    sc.cell_part(range.col_start, range.row_start);
    if (!sc.eof() && sc.peek() == ':') {
        ++sc.pos;
        sc.cell_part(range.col_end, range.row_end);
    } else {
        range.col_end = range.col_start;
        range.row_end = range.row_start;
    }
    if (!sc.eof())
        fail(Errc::SyntaxError, "trailing input in range: " + std::string(text));
    if (range.col_end < range.col_start || range.row_end < range.row_start)
        fail(Errc::SyntaxError, "inverted range: " + std::string(text));
    return range;
}

// ------------------------------------------------------------- expressions

int builtin_arity(Builtin fn) {
    switch (fn) {
    case Builtin::If: return 3;
    case Builtin::Match: return 3;
    case Builtin::Index: return 2;
    case Builtin::RankEq: return 3;
    }
    return 0;
}

const char* builtin_name(Builtin fn) {
    switch (fn) {
    case Builtin::If: return "IF";
    case Builtin::Match: return "MATCH";
    case Builtin::Index: return "INDEX";
    case Builtin::RankEq: return "RANK.EQ";
    }
    return "?";
}

ExprPtr make_number(double v) { return std::make_shared<Expr>(NumberLit{v}); }
ExprPtr make_text(std::string v) { return std::make_shared<Expr>(TextLit{std::move(v)}); }
namespace {
void check_built_addr(const std::string& sheet, int col, int row) {
    if (sheet.empty())
        fail(Errc::BadValue, "cell reference needs a sheet name");
    if (col < 1 || col > kMaxCol || row < 1 || row > kMaxRow)
        fail(Errc::BadValue, "cell reference out of sheet bounds: col " + std::to_string(col) +
                                 ", row " + std::to_string(row));
}
} // namespace

ExprPtr make_ref(CellAddr addr) {
    check_built_addr(addr.sheet, addr.col, addr.row);
    return std::make_shared<Expr>(CellRef{std::move(addr)});
}

ExprPtr make_range(CellRange range) {
    check_built_addr(range.sheet, range.col_start, range.row_start);
    check_built_addr(range.sheet, range.col_end, range.row_end);
    if (range.col_start > range.col_end || range.row_start > range.row_end)
        fail(Errc::BadValue, "inverted range");
    return std::make_shared<Expr>(RangeRef{std::move(range)});
}
ExprPtr make_name(std::string name) { return std::make_shared<Expr>(NameRef{std::move(name)}); }

ExprPtr make_binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
    return std::make_shared<Expr>(Binary{op, std::move(lhs), std::move(rhs)});
}

ExprPtr make_call(Builtin fn, std::vector<ExprPtr> args) {
    if (static_cast<int>(args.size()) != builtin_arity(fn))
        fail(Errc::ArityError, std::string(builtin_name(fn)) + " takes " +
                                   std::to_string(builtin_arity(fn)) + " arguments, got " +
                                   std::to_string(args.size()));
    return std::make_shared<Expr>(Call{fn, std::move(args)});
}

namespace {
// Distinguishes 0.0 from -0.0 and treats equal NaN payloads as equal, so
// render/parse round-trip checks are exact.
bool bitwise_equal(double x, double y) {
    return std::memcmp(&x, &y, sizeof x) == 0;
}
} // namespace

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    if (a->index() != b->index())
        return false;
    return std::visit(
        [&](const auto& lhs) -> bool {
            using T = std::decay_t<decltype(lhs)>;
            const T& rhs = std::get<T>(*b);
            if constexpr (std::is_same_v<T, NumberLit>) {
                return bitwise_equal(lhs.value, rhs.value);
            } else if constexpr (std::is_same_v<T, TextLit>) {
                return lhs.value == rhs.value;
            } else if constexpr (std::is_same_v<T, CellRef>) {
                return lhs.addr == rhs.addr;
            } else if constexpr (std::is_same_v<T, RangeRef>) {
                return lhs.range == rhs.range;
            } else if constexpr (std::is_same_v<T, NameRef>) {
                return lhs.name == rhs.name;
            } else if constexpr (std::is_same_v<T, Binary>) {
                return lhs.op == rhs.op && expr_equal(lhs.lhs, rhs.lhs) &&
                       expr_equal(lhs.rhs, rhs.rhs);
            } else {
                static_assert(std::is_same_v<T, Call>);
                if (lhs.fn != rhs.fn || lhs.args.size() != rhs.args.size())
                    return false;
                for (size_t i = 0; i < lhs.args.size(); ++i)
                    if (!expr_equal(lhs.args[i], rhs.args[i]))
                        return false;
                return true;
            }
        },
        *a);
}

// -------------------------------------------------------------- rendering

namespace {

// Precedence: comparisons bind loosest, then &, then +/-, then */, with
// atoms (including folded negative literals) tightest.
int binop_level(BinOp op) {
    switch (op) {
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
        return 1;
    case BinOp::Concat:
        return 2;
    case BinOp::Add:
    case BinOp::Sub:
        return 3;
    case BinOp::Mul:
    case BinOp::Div:
        return 4;
    }
    return 0;
}

const char* binop_text(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Concat: return "&";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "<>";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    }
    return "?";
}

int expr_level(const Expr& e) {
    if (const auto* b = std::get_if<Binary>(&e))
        return binop_level(b->op);
    if (const auto* n = std::get_if<NumberLit>(&e)) {
        // "-3" behaves like a unary-minus expression in operator contexts.
        if (n->value < 0 || (n->value == 0 && std::signbit(n->value)))
            return 5;
    }
    return 6;
}

std::string ref_text(const CellAddr& addr, std::string_view home_sheet) {
    check_addr(addr.col, addr.row);
    std::string cell = col_letters(addr.col) + std::to_string(addr.row);
    if (addr.sheet == home_sheet)
        return cell;
    return sheet_prefix(addr.sheet) + cell;
}

std::string range_text(const CellRange& range, std::string_view home_sheet) {
    check_addr(range.col_start, range.row_start);
    check_addr(range.col_end, range.row_end);
    std::string cells = col_letters(range.col_start) + std::to_string(range.row_start) + ":" +
                        col_letters(range.col_end) + std::to_string(range.row_end);
    if (range.sheet == home_sheet)
        return cells;
    return sheet_prefix(range.sheet) + cells;
}

void render_expr(const Expr& e, std::string_view home_sheet, int min_level, std::string& out) {
    bool parens = expr_level(e) < min_level;
    if (parens)
        out += '(';
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NumberLit>) {
                out += canonical_number(node.value);
            } else if constexpr (std::is_same_v<T, TextLit>) {
                out += '"';
                for (char c : node.value) {
                    out += c;
                    if (c == '"')
                        out += '"';
                }
                out += '"';
            } else if constexpr (std::is_same_v<T, CellRef>) {
                out += ref_text(node.addr, home_sheet);
            } else if constexpr (std::is_same_v<T, RangeRef>) {
                out += range_text(node.range, home_sheet);
            } else if constexpr (std::is_same_v<T, NameRef>) {
                out += node.name;
            } else if constexpr (std::is_same_v<T, Binary>) {
                int level = binop_level(node.op);
                render_expr(*node.lhs, home_sheet, level, out);
                out += binop_text(node.op);
                render_expr(*node.rhs, home_sheet, level + 1, out);
            } else {
                static_assert(std::is_same_v<T, Call>);
                out += builtin_name(node.fn);
                out += '(';
                for (size_t i = 0; i < node.args.size(); ++i) {
                    if (i)
                        out += ',';
                    render_expr(*node.args[i], home_sheet, 0, out);
                }
                out += ')';
            }
        },
        e);
    if (parens)
        out += ')';
}

} // namespace

std::string render_formula(const ExprPtr& expr, std::string_view home_sheet) {
    if (!expr)
        fail(Errc::SyntaxError, "cannot render empty formula");
    std::string out = "=";
    render_expr(*expr, home_sheet, 0, out);
    return out;
}

// ---------------------------------------------------------------- parsing

namespace {

enum class FTokKind {
    Number,
    Text,
    QuotedSheet, // '...' content, quotes stripped, '' unescaped
    Ident,
    LParen,
    RParen,
    Comma,
    Colon,
    Bang,
    Amp,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    End,
};

struct FTok {
    FTokKind kind = FTokKind::End;
    std::string text;
    double num = 0;
    size_t pos = 0;
};

[[noreturn]] void syntax_fail(const std::string& what, size_t pos) {
    fail(Errc::SyntaxError, what + " at offset " + std::to_string(pos));
}

std::vector<FTok> lex_formula(std::string_view src) {
    std::vector<FTok> toks;
    size_t i = 0;
    auto push = [&](FTokKind k, size_t pos, std::string text = {}, double num = 0) {
        toks.push_back(FTok{k, std::move(text), num, pos});
    };
    while (i < src.size()) {
        char c = src[i];
        size_t pos = i;
        if (c == ' ') {
            ++i;
            continue;
        }
        if (is_ascii_digit(c) || (c == '.' && i + 1 < src.size() && is_ascii_digit(src[i + 1]))) {
            size_t end = i;
            while (end < src.size() && (is_ascii_digit(src[end]) || src[end] == '.'))
                ++end;
            if (end < src.size() && (src[end] == 'e' || src[end] == 'E')) {
                size_t exp = end + 1;
                if (exp < src.size() && (src[exp] == '+' || src[exp] == '-'))
                    ++exp;
                if (exp < src.size() && is_ascii_digit(src[exp])) {
                    while (exp < src.size() && is_ascii_digit(src[exp]))
                        ++exp;
                    end = exp;
                }
            }
            std::string text(src.substr(i, end - i));
            char* parse_end = nullptr;
            double v = std::strtod(text.c_str(), &parse_end);
            if (parse_end != text.c_str() + text.size())
                syntax_fail("bad number literal '" + text + "'", pos);
            push(FTokKind::Number, pos, std::move(text), v);
            i = end;
            continue;
        }
        if (c == '"') {
            ++i;
            std::string value;
            while (true) {
                if (i >= src.size())
                    syntax_fail("unterminated text literal", pos);
                char d = src[i++];
                if (d == '"') {
                    if (i < src.size() && src[i] == '"') {
                        value += '"';
                        ++i;
                    } else {
                        break;
                    }
                } else {
                    value += d;
                }
            }
            push(FTokKind::Text, pos, std::move(value));
            continue;
        }
        if (c == '\'') {
            ++i;
            std::string name;
            while (true) {
                if (i >= src.size())
                    syntax_fail("unterminated sheet name quote", pos);
                char d = src[i++];
                if (d == '\'') {
                    if (i < src.size() && src[i] == '\'') {
                        name += '\'';
                        ++i;
                    } else {
                        break;
                    }
                } else {
                    name += d;
                }
            }
            push(FTokKind::QuotedSheet, pos, std::move(name));
            continue;
        }
        if (is_ident_start(c)) {
            size_t end = i;
            while (end < src.size() && is_ident_char(src[end]))
                ++end;
            push(FTokKind::Ident, pos, std::string(src.substr(i, end - i)));
            i = end;
            continue;
        }
        switch (c) {
        case '(': push(FTokKind::LParen, pos); ++i; break;
        case ')': push(FTokKind::RParen, pos); ++i; break;
        case ',': push(FTokKind::Comma, pos); ++i; break;
        case ':': push(FTokKind::Colon, pos); ++i; break;
        case '!': push(FTokKind::Bang, pos); ++i; break;
        case '&': push(FTokKind::Amp, pos); ++i; break;
        case '+': push(FTokKind::Plus, pos); ++i; break;
        case '-': push(FTokKind::Minus, pos); ++i; break;
        case '*': push(FTokKind::Star, pos); ++i; break;
        case '/': push(FTokKind::Slash, pos); ++i; break;
        case '=': push(FTokKind::Eq, pos); ++i; break;
        case '<':
            if (i + 1 < src.size() && src[i + 1] == '>') {
                push(FTokKind::Ne, pos);
                i += 2;
            } else if (i + 1 < src.size() && src[i + 1] == '=') {
                push(FTokKind::Le, pos);
                i += 2;
            } else {
                push(FTokKind::Lt, pos);
                ++i;
            }
            break;
        case '>':
            if (i + 1 < src.size() && src[i + 1] == '=') {
                push(FTokKind::Ge, pos);
                i += 2;
            } else {
                push(FTokKind::Gt, pos);
                ++i;
            }
            break;
        default:
            syntax_fail(std::string("unexpected character '") + c + "'", pos);
        }
    }
    toks.push_back(FTok{FTokKind::End, {}, 0, src.size()});
    return toks;
}

std::string upper_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

struct FormulaParser {
    std::vector<FTok> toks;
    size_t idx = 0;
    std::string home_sheet;

    const FTok& peek() const { return toks[idx]; }
    const FTok& next() { return toks[idx++]; }
    bool eat(FTokKind k) {
        if (peek().kind == k) {
            ++idx;
            return true;
        }
        return false;
    }
    void expect(FTokKind k, const char* what) {
        if (!eat(k))
            syntax_fail(std::string("expected ") + what, peek().pos);
    }

    ExprPtr parse() {
        ExprPtr e = compare();
        if (peek().kind != FTokKind::End)
            syntax_fail("trailing input", peek().pos);
        return e;
    }

    ExprPtr compare() {
        ExprPtr lhs = concat();
        while (true) {
            BinOp op;
            switch (peek().kind) {
            case FTokKind::Eq: op = BinOp::Eq; break;
            case FTokKind::Ne: op = BinOp::Ne; break;
            case FTokKind::Lt: op = BinOp::Lt; break;
            case FTokKind::Le: op = BinOp::Le; break;
            case FTokKind::Gt: op = BinOp::Gt; break;
            case FTokKind::Ge: op = BinOp::Ge; break;
            default: return lhs;
            }
            ++idx;
            lhs = make_binary(op, std::move(lhs), concat());
        }
    }

    ExprPtr concat() {
        ExprPtr lhs = addsub();
        while (eat(FTokKind::Amp))
            lhs = make_binary(BinOp::Concat, std::move(lhs), addsub());
        return lhs;
    }

    ExprPtr addsub() {
        ExprPtr lhs = muldiv();
        while (true) {
            if (eat(FTokKind::Plus))
                lhs = make_binary(BinOp::Add, std::move(lhs), muldiv());
            else if (eat(FTokKind::Minus))
                lhs = make_binary(BinOp::Sub, std::move(lhs), muldiv());
            else
                return lhs;
        }
    }

    ExprPtr muldiv() {
        ExprPtr lhs = unary();
        while (true) {
            if (eat(FTokKind::Star))
                lhs = make_binary(BinOp::Mul, std::move(lhs), unary());
            else if (eat(FTokKind::Slash))
                lhs = make_binary(BinOp::Div, std::move(lhs), unary());
            else
                return lhs;
        }
    }

    ExprPtr unary() {
        if (eat(FTokKind::Minus)) {
            ExprPtr inner = unary();
            if (const auto* n = std::get_if<NumberLit>(inner.get()))
                return make_number(-n->value);
            return make_binary(BinOp::Sub, make_number(0), std::move(inner));
        }
        return atom();
    }

    ExprPtr atom() {
        const FTok& t = peek();
        switch (t.kind) {
        case FTokKind::Number: {
            double v = t.num;
            ++idx;
            return make_number(v);
        }
        case FTokKind::Text: {
            std::string v = t.text;
            ++idx;
            return make_text(std::move(v));
        }
        case FTokKind::LParen: {
            ++idx;
            ExprPtr e = compare();
            expect(FTokKind::RParen, "')'");
            return e;
        }
        case FTokKind::QuotedSheet: {
            std::string sheet = t.text;
            ++idx;
            expect(FTokKind::Bang, "'!' after sheet name");
            return reference(sheet);
        }
        case FTokKind::Ident:
            return ident_atom();
        default:
            syntax_fail("expected value", t.pos);
        }
    }

    // Ident seen: sheet-qualified ref, function call, bare ref/range, or name.
    ExprPtr ident_atom() {
        FTok t = next();
        if (peek().kind == FTokKind::Bang) {
            ++idx;
            return reference(t.text);
        }
        if (peek().kind == FTokKind::LParen) {
            std::string canon = upper_ascii(t.text);
            Builtin fn;
            if (canon == "IF")
                fn = Builtin::If;
            else if (canon == "MATCH")
                fn = Builtin::Match;
            else if (canon == "INDEX")
                fn = Builtin::Index;
            else if (canon == "RANK.EQ")
                fn = Builtin::RankEq;
            else
                fail(Errc::UnknownFunction, "unknown function: " + t.text);
            ++idx;
            std::vector<ExprPtr> args;
            if (!eat(FTokKind::RParen)) {
                args.push_back(compare());
                while (eat(FTokKind::Comma))
                    args.push_back(compare());
                expect(FTokKind::RParen, "')'");
            }
            if (static_cast<int>(args.size()) != builtin_arity(fn))
                fail(Errc::ArityError, canon + " takes " + std::to_string(builtin_arity(fn)) +
                                           " arguments, got " + std::to_string(args.size()));
            return make_call(fn, std::move(args));
        }
        int col = 0, row = 0;
        if (split_a1(t.text, col, row)) {
            if (peek().kind == FTokKind::Colon) {
                // Only a range when the other side is also a plain cell.
                if (toks[idx + 1].kind == FTokKind::Ident) {
                    int col2 = 0, row2 = 0;
                    if (split_a1(toks[idx + 1].text, col2, row2)) {
                        idx += 2;
                        if (col2 < col || row2 < row)
                            syntax_fail("inverted range", t.pos);
                        return make_range(CellRange{home_sheet, col, row, col2, row2});
                    }
                }
                syntax_fail("expected cell after ':'", toks[idx].pos);
            }
            return make_ref(CellAddr{home_sheet, col, row});
        }
        return make_name(std::move(t.text));
    }

    // After `sheet!`: a cell or a range on that sheet.
    ExprPtr reference(const std::string& sheet) {
        const FTok& t = peek();
        if (t.kind != FTokKind::Ident)
            syntax_fail("expected cell reference after '!'", t.pos);
        int col = 0, row = 0;
        if (!split_a1(t.text, col, row))
            syntax_fail("invalid cell reference '" + t.text + "'", t.pos);
        ++idx;
        if (peek().kind == FTokKind::Colon) {
            if (toks[idx + 1].kind != FTokKind::Ident)
                syntax_fail("expected cell after ':'", toks[idx].pos);
            int col2 = 0, row2 = 0;
            if (!split_a1(toks[idx + 1].text, col2, row2))
                syntax_fail("invalid cell reference '" + toks[idx + 1].text + "'",
                            toks[idx + 1].pos);
            idx += 2;
            if (col2 < col || row2 < row)
                syntax_fail("inverted range", t.pos);
            return make_range(CellRange{sheet, col, row, col2, row2});
        }
        return make_ref(CellAddr{sheet, col, row});
    }
};

} // namespace

ExprPtr parse_formula(std::string_view text, std::string_view home_sheet) {
    if (text.empty() || text.front() != '=')
        fail(Errc::SyntaxError, "formula must start with '='");
    FormulaParser parser;
    parser.toks = lex_formula(text.substr(1));
    parser.home_sheet = std::string(home_sheet);
    return parser.parse();
}

// ---------------------------------------------------------------- workbook

int Sheet::max_row() const {
    int best = 0;
    for (const auto& [key, cell] : cells)
        best = std::max(best, key.first);
    return best;
}

int Sheet::max_col() const {
    int best = 0;
    for (const auto& [key, cell] : cells)
        best = std::max(best, key.second);
    return best;
}

Sheet& Workbook::add_sheet(const std::string& name) {
    if (name.empty())
        fail(Errc::BadSheetName, "sheet name is empty");
    auto [it, inserted] = sheets.try_emplace(name);
    if (!inserted)
        fail(Errc::BadSheetName, "sheet '" + name + "' already exists");
    sheet_order.push_back(name);
    return it->second;
}

const Sheet* Workbook::find_sheet(const std::string& name) const {
    auto it = sheets.find(name);
    return it == sheets.end() ? nullptr : &it->second;
}

void Workbook::define_name(const std::string& name, NameTarget target) {
    if (name.empty())
        fail(Errc::BadValue, "range name is empty");
    if (!names.emplace(name, std::move(target)).second)
        fail(Errc::BadValue, "name '" + name + "' already defined");
}

void Workbook::define_param(const std::string& name, const CellAddr& addr) {
    define_name(name, addr);
    params[name] = addr;
}

} // namespace sheetql
