#include "sheetql/value.hpp"

#include "sheetql/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace sheetql {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::RaggedRows: return "RaggedRows";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnparsableNumber: return "UnparsableNumber";
    case Errc::EmptyNumberField: return "EmptyNumberField";
    case Errc::DuplicateColumn: return "DuplicateColumn";
    case Errc::BadColumnName: return "BadColumnName";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::BadValue: return "BadValue";
    case Errc::InconsistentIndices: return "InconsistentIndices";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::EmptyProjection: return "EmptyProjection";
    case Errc::DuplicateOrderColumn: return "DuplicateOrderColumn";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::NonNumericOrderKey: return "NonNumericOrderKey";
    case Errc::TypeMismatchOrdering: return "TypeMismatchOrdering";
    case Errc::UnknownFunction: return "UnknownFunction";
    case Errc::ArityError: return "ArityError";
    case Errc::SkCapacityExceeded: return "SkCapacityExceeded";
    case Errc::BadSheetName: return "BadSheetName";
    case Errc::MalformedGrid: return "MalformedGrid";
    case Errc::MalformedPlan: return "MalformedPlan";
    case Errc::UnknownParam: return "UnknownParam";
    }
    return "Error";
}

const char* error_token(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Na: return "#N/A";
    case ErrorKind::Value: return "#VALUE!";
    case ErrorKind::Ref: return "#REF!";
    case ErrorKind::Name: return "#NAME?";
    case ErrorKind::Div0: return "#DIV/0!";
    case ErrorKind::Circ: return "#CIRC!";
    }
    return "#ERR!";
}

namespace {

std::string format_g(double x, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    return buf;
}

// Integers below 10^15 print in plain digits (at most 15 of them, always an
// exact round trip); %g would pick scientific notation for many of them.
bool plain_integer(double x) {
    return std::isfinite(x) && x == std::trunc(x) && std::fabs(x) < 1e15;
}

std::string format_integer(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
}

} // namespace

std::string canonical_number(double x) {
    if (plain_integer(x))
        return format_integer(x);
    for (int precision = 1; precision <= 17; ++precision) {
        std::string s = format_g(x, precision);
        if (std::strtod(s.c_str(), nullptr) == x) {
            return s;
        }
    }
    return format_g(x, 17);
}

std::string display_number(double x) {
    if (plain_integer(x))
        return format_integer(x);
    // %g already drops trailing zeros.
    std::string best = format_g(x, 15);
    for (int precision = 1; precision < 15; ++precision) {
        std::string s = format_g(x, precision);
        if (std::strtod(s.c_str(), nullptr) == std::strtod(best.c_str(), nullptr)) {
            return s;
        }
    }
    return best;
}

std::string Value::display() const {
    if (is_number()) {
        return display_number(as_number());
    }
    if (is_text()) {
        return as_text();
    }
    if (is_bool()) {
        return as_bool() ? "TRUE" : "FALSE";
    }
    return error_token(as_error());
}

bool Value::bitwise_equal(const Value& other) const {
    if (v_.index() != other.v_.index()) {
        return false;
    }
    if (is_number()) {
        double a = as_number();
        double b = other.as_number();
        return std::memcmp(&a, &b, sizeof(double)) == 0;
    }
    return v_ == other.v_;
}

namespace {

char ascii_fold(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

} // namespace

bool text_equal_ci(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (size_t i = 0; i < a.size(); ++i) {
        if (ascii_fold(a[i]) != ascii_fold(b[i])) {
            return false;
        }
    }
    return true;
}

int text_compare_ci(std::string_view a, std::string_view b) {
    size_t n = a.size() < b.size() ? a.size() : b.size();
    for (size_t i = 0; i < n; ++i) {
        char ca = ascii_fold(a[i]);
        char cb = ascii_fold(b[i]);
        if (ca != cb) {
            return ca < cb ? -1 : 1;
        }
    }
    if (a.size() == b.size()) {
        return 0;
    }
    return a.size() < b.size() ? -1 : 1;
}

const char* cmp_op_text(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

Value eval_compare(CmpOp op, const Value& lhs, const Value& rhs) {
    if (lhs.is_error()) {
        return lhs;
    }
    if (rhs.is_error()) {
        return rhs;
    }

    bool same_kind = (lhs.is_number() && rhs.is_number()) || (lhs.is_text() && rhs.is_text())
        || (lhs.is_bool() && rhs.is_bool());

    if (op == CmpOp::Eq || op == CmpOp::Ne) {
        bool equal = false;
        if (same_kind) {
            if (lhs.is_number()) {
                equal = lhs.as_number() == rhs.as_number();
            } else if (lhs.is_text()) {
                equal = text_equal_ci(lhs.as_text(), rhs.as_text());
            } else {
                equal = lhs.as_bool() == rhs.as_bool();
            }
        }
        return Value::boolean(op == CmpOp::Eq ? equal : !equal);
    }

    // Ordering: numbers against numbers, text against text.
    int sign = 0;
    if (lhs.is_number() && rhs.is_number()) {
        double a = lhs.as_number();
        double b = rhs.as_number();
        sign = a < b ? -1 : (a > b ? 1 : 0);
    } else if (lhs.is_text() && rhs.is_text()) {
        sign = text_compare_ci(lhs.as_text(), rhs.as_text());
    } else {
        return Value::error(ErrorKind::Value);
    }

    switch (op) {
    case CmpOp::Lt: return Value::boolean(sign < 0);
    case CmpOp::Le: return Value::boolean(sign <= 0);
    case CmpOp::Gt: return Value::boolean(sign > 0);
    case CmpOp::Ge: return Value::boolean(sign >= 0);
    default: return Value::error(ErrorKind::Value);
    }
}

} // namespace sheetql
