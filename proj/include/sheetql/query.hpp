// query.hpp - the restricted SELECT dialect: AST, parser, renderer, binder
#pragma once

#include "sheetql/table.hpp"
#include "sheetql/value.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sheetql {

enum class SortDir { Ascending, Descending };

struct OrderKey {
    std::string column;
    SortDir direction = SortDir::Ascending;

    friend bool operator==(const OrderKey&, const OrderKey&) = default;
};

// Predicate AST. Comparisons have a column on the left and a literal or a
// column on the right.
struct PredNode;
using PredPtr = std::shared_ptr<const PredNode>;

struct ColumnOperand {
    std::string name;

    friend bool operator==(const ColumnOperand&, const ColumnOperand&) = default;
};

// A lifted literal slot; produced by literal lifting, never by the parser.
struct ParamRef {
    std::string name;

    friend bool operator==(const ParamRef&, const ParamRef&) = default;
};

using CmpRhs = std::variant<double, std::string, ColumnOperand, ParamRef>;

struct Comparison {
    std::string column;
    CmpOp op = CmpOp::Eq;
    CmpRhs rhs;
};

struct AndNode {
    PredPtr lhs, rhs;
};
struct OrNode {
    PredPtr lhs, rhs;
};
struct NotNode {
    PredPtr child;
};

struct PredNode : std::variant<Comparison, AndNode, OrNode, NotNode> {
    using variant::variant;
};

bool pred_equal(const PredPtr& a, const PredPtr& b);

struct Query {
    std::vector<std::string> projection;
    std::string source;
    PredPtr predicate; // null when absent
    std::vector<OrderKey> order_keys;
};

bool query_equal(const Query& a, const Query& b);

// Grammar:
//   SELECT col (, col)* FROM ident (WHERE pred)? (ORDER BY col (ASC|DESC)? ...)?
// Keywords are case-insensitive; identifiers are bare words or double-quoted;
// text literals are single-quoted. Predicate precedence: NOT > AND > OR.
Query parse_query(std::string_view text);

// Inverse of parse_query up to structural equality.
std::string render_query(const Query& q);

// Bound predicate: column indices resolved (1-based), cross-type equality
// comparisons folded to constants.
struct BoundPred;
using BoundPredPtr = std::shared_ptr<const BoundPred>;

using BoundRhs = std::variant<double, std::string, int>; // int = column index

struct BComparison {
    int column = 0; // 1-based
    CmpOp op = CmpOp::Eq;
    BoundRhs rhs;
};
struct BConst {
    bool value = false;
};
struct BAnd {
    BoundPredPtr lhs, rhs;
};
struct BOr {
    BoundPredPtr lhs, rhs;
};
struct BNot {
    BoundPredPtr child;
};

struct BoundPred : std::variant<BComparison, BConst, BAnd, BOr, BNot> {
    using variant::variant;
};

struct BoundOrderKey {
    int column = 0; // 1-based
    SortDir direction = SortDir::Ascending;
};

struct BoundQuery {
    Query query;
    std::vector<int> projection; // 1-based column indices, parallel to query.projection
    BoundPredPtr predicate;      // null when absent
    std::vector<BoundOrderKey> order_keys;
};

BoundQuery bind_query(const Query& query, const Table& table);

// Direct evaluation of a bound predicate over a table row; shares comparison
// semantics with the engine through eval_compare.
bool eval_bound_pred(const BoundPred& pred, const std::vector<Scalar>& row);

} // namespace sheetql
