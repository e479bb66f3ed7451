// errors.hpp - error codes and the exception type used across the library
#pragma once

#include <stdexcept>
#include <string>

namespace sheetql {

enum class Errc {
    // csv / table
    RaggedRows,
    EmptyInput,
    UnparsableNumber,
    EmptyNumberField,
    DuplicateColumn,
    BadColumnName,
    // layout config
    UnknownKey,
    BadValue,
    InconsistentIndices,
    // query parsing / binding
    SyntaxError,
    EmptyProjection,
    DuplicateOrderColumn,
    UnknownColumn,
    NonNumericOrderKey,
    TypeMismatchOrdering,
    // formula parsing
    UnknownFunction,
    ArityError,
    // compilation
    SkCapacityExceeded,
    BadSheetName,
    // grid files, engine, verification
    MalformedGrid,
    MalformedPlan,
    UnknownParam,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace sheetql
