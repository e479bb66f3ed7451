// value.hpp - runtime scalar values and the comparison semantics shared by
// the formula engine and the relational oracle
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace sheetql {

enum class ErrorKind { Na, Value, Ref, Name, Div0, Circ };

// Canonical token, e.g. "#N/A" for Na.
const char* error_token(ErrorKind kind);

class Value {
public:
    Value() : v_(0.0) {}

    static Value number(double x) { return Value(x); }
    static Value text(std::string s) { return Value(std::move(s)); }
    static Value boolean(bool b) { return Value(b); }
    static Value error(ErrorKind k) { return Value(k); }

    bool is_number() const { return std::holds_alternative<double>(v_); }
    bool is_text() const { return std::holds_alternative<std::string>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_error() const { return std::holds_alternative<ErrorKind>(v_); }
    bool is_na() const { return is_error() && as_error() == ErrorKind::Na; }

    double as_number() const { return std::get<double>(v_); }
    const std::string& as_text() const { return std::get<std::string>(v_); }
    bool as_bool() const { return std::get<bool>(v_); }
    ErrorKind as_error() const { return std::get<ErrorKind>(v_); }

    // Rendering for values files and reports: numbers with up to 15
    // significant digits, TRUE/FALSE, canonical error tokens, text verbatim.
    std::string display() const;

    // Structural equality, doubles compared exactly.
    friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

    // Bit-level equality, used by the determinism checks.
    bool bitwise_equal(const Value& other) const;

private:
    explicit Value(double x) : v_(x) {}
    explicit Value(std::string s) : v_(std::move(s)) {}
    explicit Value(bool b) : v_(b) {}
    explicit Value(ErrorKind k) : v_(k) {}

    std::variant<double, std::string, bool, ErrorKind> v_;
};

// Number rendering. canonical_number round-trips the exact double (shortest
// form, up to 17 significant digits); display_number caps at 15 significant
// digits for human-facing output.
std::string canonical_number(double x);
std::string display_number(double x);

// Case-insensitive text handling (ASCII fold, applied bytewise).
bool text_equal_ci(std::string_view a, std::string_view b);
int text_compare_ci(std::string_view a, std::string_view b);

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* cmp_op_text(CmpOp op);

// The one definition of comparison semantics. Equality across differing
// types is FALSE (inequality TRUE); ordering across differing types is
// #VALUE!; text compares case-insensitively; errors propagate, left first.
// Both the engine and the relational oracle go through this function.
Value eval_compare(CmpOp op, const Value& lhs, const Value& rhs);

} // namespace sheetql
