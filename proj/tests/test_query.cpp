// SELECT dialect: parsing, rendering, binding, bound-predicate evaluation.
#include "sheetql/errors.hpp"
#include "sheetql/query.hpp"
#include "sheetql/table.hpp"

#include <doctest.h>

#include <functional>
#include <random>

using namespace sheetql;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::BadValue; // unreachable
}

PredPtr cmp(std::string col, CmpOp op, CmpRhs rhs) {
    return std::make_shared<PredNode>(Comparison{std::move(col), op, std::move(rhs)});
}

Table sample_table() {
    return load_table("Club,Product,Cost,Pop,Previous_Cost\n"
                      "689,GPI,69,422,75\n"
                      "711,CV,72,4128,60\n"
                      "689,NVA,72,422,80\n"
                      "702,AB,5,9,5\n",
                      "Purchases");
}

} // namespace

TEST_CASE("parse_query basic WHERE") {
    Query q = parse_query("SELECT Club, Pop FROM t WHERE Product = 'GPI'");
    CHECK(q.projection == std::vector<std::string>{"Club", "Pop"});
    CHECK(q.source == "t");
    REQUIRE(q.predicate);
    CHECK(pred_equal(q.predicate, cmp("Product", CmpOp::Eq, CmpRhs{std::string("GPI")})));
    CHECK(q.order_keys.empty());
}

TEST_CASE("parse_query minimal statement") {
    Query q = parse_query("SELECT A FROM t");
    CHECK(q.projection == std::vector<std::string>{"A"});
    CHECK(!q.predicate);
    CHECK(q.order_keys.empty());
}

TEST_CASE("parse_query two descending order keys") {
    Query q = parse_query("SELECT Club FROM t ORDER BY Cost DESC, Pop DESC");
    REQUIRE(q.order_keys.size() == 2);
    CHECK(q.order_keys[0] == OrderKey{"Cost", SortDir::Descending});
    CHECK(q.order_keys[1] == OrderKey{"Pop", SortDir::Descending});
}

TEST_CASE("parse_query default direction is ascending") {
    Query q = parse_query("SELECT A FROM t ORDER BY B, C DESC, D ASC");
    REQUIRE(q.order_keys.size() == 3);
    CHECK(q.order_keys[0].direction == SortDir::Ascending);
    CHECK(q.order_keys[1].direction == SortDir::Descending);
    CHECK(q.order_keys[2].direction == SortDir::Ascending);
}

TEST_CASE("parse_query keywords are case-insensitive") {
    Query q = parse_query("select A from t where B > 1 order by A desc");
    CHECK(q.projection == std::vector<std::string>{"A"});
    REQUIRE(q.predicate);
    CHECK(q.order_keys.size() == 1);
}

TEST_CASE("parse_query quoted identifiers and text literals") {
    Query q = parse_query("SELECT \"Product Code\" FROM \"My Table\" "
                          "WHERE \"Product Code\" = 'it''s'");
    CHECK(q.projection == std::vector<std::string>{"Product Code"});
    CHECK(q.source == "My Table");
    CHECK(pred_equal(q.predicate,
                     cmp("Product Code", CmpOp::Eq, CmpRhs{std::string("it's")})));
}

TEST_CASE("parse_query precedence NOT > AND > OR") {
    Query q = parse_query("SELECT A FROM t WHERE NOT A = 1 AND B = 2 OR C = 3");
    // ((NOT (A=1)) AND (B=2)) OR (C=3)
    PredPtr expected = std::make_shared<PredNode>(
        OrNode{std::make_shared<PredNode>(
                   AndNode{std::make_shared<PredNode>(
                               NotNode{cmp("A", CmpOp::Eq, CmpRhs{1.0})}),
                           cmp("B", CmpOp::Eq, CmpRhs{2.0})}),
               cmp("C", CmpOp::Eq, CmpRhs{3.0})});
    CHECK(pred_equal(q.predicate, expected));
}

TEST_CASE("parse_query parentheses override precedence") {
    Query q = parse_query("SELECT A FROM t WHERE A = 1 AND (B = 2 OR C = 3)");
    PredPtr expected = std::make_shared<PredNode>(
        AndNode{cmp("A", CmpOp::Eq, CmpRhs{1.0}),
                std::make_shared<PredNode>(OrNode{cmp("B", CmpOp::Eq, CmpRhs{2.0}),
                                                  cmp("C", CmpOp::Eq, CmpRhs{3.0})})});
    CHECK(pred_equal(q.predicate, expected));
}

TEST_CASE("parse_query all six comparison operators and column rhs") {
    Query q = parse_query(
        "SELECT A FROM t WHERE A = 1 AND B <> 2 AND C < 3 AND D <= 4 AND E > 5 "
        "AND F >= 6 AND Cost > Previous_Cost");
    REQUIRE(q.predicate);
    // Spot-check the column-vs-column comparison at the right end.
    const auto* andn = std::get_if<AndNode>(q.predicate.get());
    REQUIRE(andn);
    const auto* leaf = std::get_if<Comparison>(andn->rhs.get());
    REQUIRE(leaf);
    CHECK(leaf->column == "Cost");
    CHECK(leaf->op == CmpOp::Gt);
    CHECK(std::get<ColumnOperand>(leaf->rhs) == ColumnOperand{"Previous_Cost"});
}

TEST_CASE("parse_query negative and decimal literals") {
    Query q = parse_query("SELECT A FROM t WHERE A > -2.5");
    CHECK(pred_equal(q.predicate, cmp("A", CmpOp::Gt, CmpRhs{-2.5})));
}

TEST_CASE("parse_query errors") {
    CHECK(code_of([] { parse_query("SELECT FROM t"); }) == Errc::EmptyProjection);
    CHECK(code_of([] { parse_query(""); }) == Errc::SyntaxError);
    CHECK(code_of([] { parse_query("SELECT A"); }) == Errc::SyntaxError);
    CHECK(code_of([] { parse_query("SELECT A FROM t WHERE"); }) == Errc::SyntaxError);
    CHECK(code_of([] { parse_query("SELECT A FROM t extra"); }) == Errc::SyntaxError);
    CHECK(code_of([] { parse_query("SELECT A FROM t ORDER BY B, B"); }) ==
          Errc::DuplicateOrderColumn);
    CHECK(code_of([] { parse_query("SELECT A FROM t WHERE A = "); }) == Errc::SyntaxError);
    CHECK(code_of([] { parse_query("SELECT A FROM t WHERE 'x' = A"); }) == Errc::SyntaxError);
}

TEST_CASE("syntax errors carry a position") {
    try {
        parse_query("SELECT A FROM t extra");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
}

TEST_CASE("parse-render-parse is identity on handwritten queries") {
    const char* samples[] = {
        "SELECT A FROM t",
        "SELECT Club, Pop FROM t WHERE Product = 'GPI'",
        "SELECT Club FROM t ORDER BY Cost DESC, Pop DESC",
        "SELECT A FROM t WHERE NOT A = 1 AND B = 2 OR C = 3",
        "SELECT A FROM t WHERE A = 1 AND (B = 2 OR C = 3)",
        "SELECT \"Product Code\" FROM \"My Table\" WHERE \"Product Code\" = 'it''s'",
        "SELECT A FROM t WHERE Cost > Previous_Cost ORDER BY A",
        "SELECT A FROM t WHERE A > -2.5",
        "SELECT A FROM t WHERE NOT (A = 1 OR B = 2)",
    };
    for (const char* text : samples) {
        CAPTURE(text);
        Query q1 = parse_query(text);
        Query q2 = parse_query(render_query(q1));
        CHECK(query_equal(q1, q2));
    }
}

namespace {

// Random query AST for the render/parse identity property.
PredPtr random_pred(std::mt19937_64& rng, int depth) {
    if (depth >= 3 || rng() % 100 < 45) {
        const char* cols[] = {"A", "B", "Weird Name", "C1"};
        CmpOp ops[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge};
        CmpRhs rhs;
        switch (rng() % 3) {
        case 0:
            rhs = static_cast<double>(static_cast<int64_t>(rng() % 100)) - 50.0;
            break;
        case 1:
            rhs = std::string(rng() % 2 ? "GPI" : "it's");
            break;
        default:
            rhs = ColumnOperand{cols[rng() % 4]};
            break;
        }
        return cmp(cols[rng() % 4], ops[rng() % 6], std::move(rhs));
    }
    switch (rng() % 3) {
    case 0:
        return std::make_shared<PredNode>(
            AndNode{random_pred(rng, depth + 1), random_pred(rng, depth + 1)});
    case 1:
        return std::make_shared<PredNode>(
            OrNode{random_pred(rng, depth + 1), random_pred(rng, depth + 1)});
    default:
        return std::make_shared<PredNode>(NotNode{random_pred(rng, depth + 1)});
    }
}

} // namespace

TEST_CASE("parse-render-parse is identity on random predicates") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        Query q;
        q.projection = {"A", "B"};
        q.source = "t";
        q.predicate = random_pred(rng, 0);
        if (rng() % 2)
            q.order_keys.push_back({"A", rng() % 2 ? SortDir::Ascending : SortDir::Descending});
        Query q2 = parse_query(render_query(q));
        CHECK(query_equal(q, q2));
    }
}

TEST_CASE("bind_query resolves projection, predicate, order keys") {
    Table t = sample_table();
    Query q = parse_query("SELECT Pop, Club FROM Purchases WHERE Pop > 1000 "
                          "ORDER BY Cost DESC");
    BoundQuery bq = bind_query(q, t);
    CHECK(bq.projection == std::vector<int>{4, 1});
    REQUIRE(bq.predicate);
    const auto* c = std::get_if<BComparison>(bq.predicate.get());
    REQUIRE(c);
    CHECK(c->column == 4);
    CHECK(c->op == CmpOp::Gt);
    CHECK(std::get<double>(c->rhs) == 1000.0);
    REQUIRE(bq.order_keys.size() == 1);
    CHECK(bq.order_keys[0].column == 3);
    CHECK(bq.order_keys[0].direction == SortDir::Descending);
}

TEST_CASE("bind_query errors") {
    Table t = sample_table();
    CHECK(code_of([&] { bind_query(parse_query("SELECT Nope FROM Purchases"), t); }) ==
          Errc::UnknownColumn);
    CHECK(code_of([&] {
              bind_query(parse_query("SELECT Club FROM Purchases ORDER BY Product"), t);
          }) == Errc::NonNumericOrderKey);
    CHECK(code_of([&] {
              bind_query(parse_query("SELECT Club FROM Purchases WHERE Pop < 'abc'"), t);
          }) == Errc::TypeMismatchOrdering);
    CHECK(code_of([&] {
              bind_query(parse_query("SELECT Club FROM Purchases WHERE Product > Pop"), t);
          }) == Errc::TypeMismatchOrdering);
    CHECK(code_of([&] {
              bind_query(parse_query("SELECT Club FROM Purchases WHERE Zip = 1"), t);
          }) == Errc::UnknownColumn);
}

TEST_CASE("bind_query folds cross-type equality to constants") {
    Table t = sample_table();
    // Pop is numeric; comparing it to text is FALSE for =, TRUE for <>.
    BoundQuery eq = bind_query(parse_query("SELECT Club FROM Purchases WHERE Pop = 'x'"), t);
    const auto* c1 = std::get_if<BConst>(eq.predicate.get());
    REQUIRE(c1);
    CHECK(c1->value == false);
    BoundQuery ne = bind_query(parse_query("SELECT Club FROM Purchases WHERE Pop <> 'x'"), t);
    const auto* c2 = std::get_if<BConst>(ne.predicate.get());
    REQUIRE(c2);
    CHECK(c2->value == true);
}

TEST_CASE("bind_query leaves query and table untouched") {
    Table t = sample_table();
    Table t_copy = t;
    Query q = parse_query("SELECT Club FROM Purchases WHERE Cost > 10 ORDER BY Cost");
    std::string rendered = render_query(q);
    BoundQuery bq = bind_query(q, t);
    CHECK(t == t_copy);
    CHECK(render_query(q) == rendered);
}

TEST_CASE("bound projection indices return matching column names") {
    Table t = sample_table();
    Query q = parse_query("SELECT Cost, Club, Cost FROM Purchases");
    BoundQuery bq = bind_query(q, t);
    REQUIRE(bq.projection.size() == q.projection.size());
    for (size_t i = 0; i < bq.projection.size(); ++i)
        CHECK(t.columns[static_cast<size_t>(bq.projection[i]) - 1].name == q.projection[i]);
}

TEST_CASE("eval_bound_pred over sample rows") {
    Table t = sample_table();
    auto holds = [&](const char* sql, int row) {
        BoundQuery bq = bind_query(parse_query(sql), t);
        REQUIRE(bq.predicate);
        return eval_bound_pred(*bq.predicate, t.rows[static_cast<size_t>(row)]);
    };
    CHECK(holds("SELECT Club FROM Purchases WHERE Product = 'GPI'", 0));
    CHECK(!holds("SELECT Club FROM Purchases WHERE Product = 'GPI'", 1));
    // Text comparison is case-insensitive, like the engine's.
    CHECK(holds("SELECT Club FROM Purchases WHERE Product = 'gpi'", 0));
    CHECK(holds("SELECT Club FROM Purchases WHERE Cost > 10 AND Pop > 1000", 1));
    CHECK(!holds("SELECT Club FROM Purchases WHERE Cost > 10 AND Pop > 1000", 0));
    CHECK(holds("SELECT Club FROM Purchases WHERE NOT Cost > 10", 3));
    CHECK(holds("SELECT Club FROM Purchases WHERE Cost > Previous_Cost", 1));
    CHECK(!holds("SELECT Club FROM Purchases WHERE Cost > Previous_Cost", 0));
    CHECK(holds("SELECT Club FROM Purchases WHERE Cost = 5 OR Cost = 69", 3));
    // Cross-type fold: `Pop = 'x'` is constant FALSE on every row.
    CHECK(!holds("SELECT Club FROM Purchases WHERE Pop = 'x'", 2));
    CHECK(holds("SELECT Club FROM Purchases WHERE Pop <> 'x'", 2));
}

TEST_CASE("ParamRef slots cannot be bound") {
    Table t = sample_table();
    Query q;
    q.projection = {"Club"};
    q.source = "Purchases";
    q.predicate = cmp("Cost", CmpOp::Gt, CmpRhs{ParamRef{"Param_1"}});
    CHECK(code_of([&] { bind_query(q, t); }) == Errc::SyntaxError);
}
