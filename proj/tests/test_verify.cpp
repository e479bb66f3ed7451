// Relational oracle, grid extraction, differential comparison, random
// instance generation, end-to-end soundness campaigns.
#include "sheetql/compile.hpp"
#include "sheetql/engine.hpp"
#include "sheetql/errors.hpp"
#include "sheetql/verify.hpp"

#include <doctest.h>

#include <string>

using namespace sheetql;

namespace {

Table cv_table() {
    // Seven CV rows among others; numbers chosen to give distinct costs.
    return load_table("Club,Product,Cost,Pop\n"
                      "689,CV,10,422\n"
                      "711,GPI,20,4128\n"
                      "702,CV,30,9\n"
                      "654,CV,40,77\n"
                      "700,AB,50,3\n"
                      "689,CV,60,422\n"
                      "711,CV,70,4128\n"
                      "702,CV,80,9\n"
                      "654,ZK,90,77\n"
                      "700,CV,95,3\n",
                      "Purchases");
}

BoundQuery bound(const char* sql, const Table& t) { return bind_query(parse_query(sql), t); }

} // namespace

TEST_CASE("oracle_select counts WHERE matches") {
    Table t = cv_table();
    OracleResult r = oracle_select(t, bound("SELECT Club FROM Purchases WHERE Product = 'CV'", t));
    CHECK(r.match_count == 7);
    CHECK(r.rows.size() == 7);
}

TEST_CASE("oracle_select identity query keeps source order") {
    Table t = cv_table();
    OracleResult r = oracle_select(t, bound("SELECT Cost FROM Purchases", t));
    REQUIRE(r.match_count == 10);
    for (int i = 0; i < 10; ++i)
        CHECK(r.rows[static_cast<size_t>(i)][0].is_number());
    CHECK(r.rows[0][0] == Value::number(10));
    CHECK(r.rows[9][0] == Value::number(95));
}

TEST_CASE("oracle_select orders tied first keys by the second key") {
    Table t = load_table("Club,Cost,Pop\n"
                         "A,100,5\n"
                         "B,100,9\n"
                         "C,50,1\n"
                         "D,100,7\n",
                         "t");
    OracleResult r =
        oracle_select(t, bound("SELECT Club FROM t ORDER BY Cost DESC, Pop DESC", t));
    REQUIRE(r.match_count == 4);
    CHECK(r.rows[0][0] == Value::text("B"));
    CHECK(r.rows[1][0] == Value::text("D"));
    CHECK(r.rows[2][0] == Value::text("A"));
    CHECK(r.rows[3][0] == Value::text("C"));
}

TEST_CASE("oracle_select breaks full ties by original position") {
    Table t = load_table("Club,Cost\nA,7\nB,7\nC,7\n", "t");
    OracleResult r = oracle_select(t, bound("SELECT Club FROM t ORDER BY Cost", t));
    CHECK(r.rows[0][0] == Value::text("A"));
    CHECK(r.rows[1][0] == Value::text("B"));
    CHECK(r.rows[2][0] == Value::text("C"));
}

TEST_CASE("oracle filtering matches engine comparison semantics") {
    Table t = load_table("Name,N\nGPI,1\ngpi,2\nCV,3\n", "t");
    // Case-insensitive text equality.
    OracleResult r = oracle_select(t, bound("SELECT N FROM t WHERE Name = 'gPi'", t));
    CHECK(r.match_count == 2);
    // Cross-type equality is constant FALSE.
    OracleResult r2 = oracle_select(t, bound("SELECT N FROM t WHERE N = 'x'", t));
    CHECK(r2.match_count == 0);
    OracleResult r3 = oracle_select(t, bound("SELECT N FROM t WHERE N <> 'x'", t));
    CHECK(r3.match_count == 3);
}

TEST_CASE("extract_grid_result reads the where block with its #N/A tail") {
    Table t = cv_table();
    CompileResult c = compile(bound("SELECT Club, Cost FROM Purchases WHERE Product = 'CV'", t),
                              t, Layout{});
    ValueGrid vg = evaluate(c.workbook);
    GridResult g = extract_grid_result(vg, c.plan);
    CHECK(g.match_count == 7);
    CHECK(g.na_tail_ok);
    CHECK(g.first_bad_tail_slot == 0);
    CHECK(g.columns == std::vector<std::string>{"Club", "Cost"});
    REQUIRE(g.rows.size() == 7);
    CHECK(g.rows[0][0] == Value::number(689));
    CHECK(g.rows[0][1] == Value::number(10));
}

TEST_CASE("extract_grid_result zero matches") {
    Table t = cv_table();
    CompileResult c = compile(bound("SELECT Club FROM Purchases WHERE Cost > 1000", t), t, {});
    GridResult g = extract_grid_result(evaluate(c.workbook), c.plan);
    CHECK(g.match_count == 0);
    CHECK(g.rows.empty());
    CHECK(g.na_tail_ok);
}

TEST_CASE("extract_grid_result flags a broken #N/A tail") {
    Table t = cv_table();
    CompileResult c = compile(bound("SELECT Club FROM Purchases WHERE Cost > 60", t), t, {});
    // Sabotage: overwrite a tail rownum cell with a literal, breaking
    // monotonicity (4 matches, slot 6 repopulated).
    const ExtractionBlock& blk = c.plan.where_block;
    AddressFactory fac = c.plan.factory();
    CellAddr bad = fac.cell(blk.sheet, 2 + 5, blk.rownum_col);
    Sheet* s = &c.workbook.sheets.at(blk.sheet);
    s->set_number(bad.row, bad.col, 3.0);
    GridResult g = extract_grid_result(evaluate(c.workbook), c.plan);
    CHECK(g.match_count == 4);
    CHECK(!g.na_tail_ok);
    CHECK(g.first_bad_tail_slot == 6);
}

TEST_CASE("extract_grid_result rejects plans pointing outside the grid") {
    Table t = cv_table();
    CompileResult c = compile(bound("SELECT Club FROM Purchases", t), t, {});
    ValueGrid vg = evaluate(c.workbook);
    CompilationPlan broken = c.plan;
    broken.where_block.rownum_col = 40; // no such column was ever populated
    try {
        extract_grid_result(vg, broken);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MalformedGrid);
    }
}

TEST_CASE("compare_results passes on identical results") {
    Table t = cv_table();
    BoundQuery bq = bound("SELECT Club, Cost FROM Purchases WHERE Product = 'CV' "
                          "ORDER BY Cost DESC", t);
    CompileResult c = compile(bq, t, {});
    GridResult g = extract_grid_result(evaluate(c.workbook), c.plan);
    VerifyReport rep = compare_results(oracle_select(t, bq), g);
    CHECK(rep.pass());
    CHECK(render_report(rep) == "PASS\n");
}

TEST_CASE("compare_results reports a missing last row") {
    Table t = cv_table();
    BoundQuery bq = bound("SELECT Club FROM Purchases WHERE Product = 'CV'", t);
    CompileResult c = compile(bq, t, {});
    GridResult g = extract_grid_result(evaluate(c.workbook), c.plan);
    g.rows.pop_back();
    g.match_count -= 1;
    VerifyReport rep = compare_results(oracle_select(t, bq), g);
    CHECK(!rep.pass());
    REQUIRE(rep.mismatches.size() == 1);
    CHECK(rep.mismatches[0].slot == 7);
    CHECK(rep.mismatches[0].column == "match_count");
}

TEST_CASE("mutation test: flipped rank direction fails with reordered slots") {
    Table t = cv_table();
    BoundQuery bq = bound("SELECT Cost FROM Purchases WHERE Product = 'CV' "
                          "ORDER BY Cost DESC", t);
    CompileResult c = compile(bq, t, {});
    // Flip the emitted RANK.EQ direction (descending 0 -> ascending 1) in the
    // rank column, the deliberate bug of the mutation test.
    const CompilationPlan& plan = c.plan;
    AddressFactory fac = plan.factory();
    Sheet* s = &c.workbook.sheets.at(plan.where_block.sheet);
    for (int i = 0; i < plan.n_rows; ++i) {
        CellAddr a = fac.cell(plan.where_block.sheet, 2 + i, plan.rank_cols[0].block_col);
        const Cell* cell = s->find(a.row, a.col);
        REQUIRE(cell != nullptr);
        std::string text = render_formula(std::get<ExprPtr>(cell->content), a.sheet);
        size_t pos = text.rfind(",0)");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 3, ",1)");
        s->set_formula(a.row, a.col, parse_formula(text, a.sheet));
    }
    GridResult g = extract_grid_result(evaluate(c.workbook), c.plan);
    VerifyReport rep = compare_results(oracle_select(t, bq), g);
    CHECK(!rep.pass());
    // Costs are distinct, so reversing the direction misplaces at least the
    // top and bottom slots; expect mismatches at both ends.
    REQUIRE(!rep.mismatches.empty());
    CHECK(rep.mismatches.front().slot == 1);
    std::string report = render_report(rep);
    CHECK(report.substr(0, 5) == "FAIL\n");
    CHECK(report.find('\t') != std::string::npos);
}

TEST_CASE("random_instance is deterministic in the seed") {
    RandomInstance a = random_instance(1234, 60, 3);
    RandomInstance b = random_instance(1234, 60, 3);
    CHECK(a.table == b.table);
    CHECK(query_equal(a.query, b.query));
    RandomInstance c = random_instance(1235, 60, 3);
    bool differs = !(a.table == c.table) || !query_equal(a.query, c.query);
    CHECK(differs);
}

TEST_CASE("random_instance respects bounds") {
    for (uint64_t seed = 0; seed < 40; ++seed) {
        RandomInstance inst = random_instance(seed, 25, 2);
        CHECK(inst.table.row_count() <= 25);
        CHECK(inst.query.order_keys.size() <= 2);
        CHECK(!inst.query.projection.empty());
    }
}

TEST_CASE("verify_query passes on an empty table") {
    RandomInstance inst = random_instance(77, 0, 3);
    CHECK(inst.table.row_count() == 0);
    VerifyReport rep = verify_query(inst.table, inst.query, Layout{});
    CHECK(rep.pass());
}

TEST_CASE("end-to-end soundness campaign over random instances") {
    for (uint64_t seed = 0; seed < 150; ++seed) {
        RandomInstance inst = random_instance(seed, 120, 3);
        VerifyReport rep = verify_query(inst.table, inst.query, Layout{});
        CAPTURE(seed);
        CAPTURE(render_query(inst.query));
        REQUIRE(rep.pass());
    }
}

TEST_CASE("campaign repeats under the horizontal orientation") {
    Layout horiz;
    horiz.orientation = Orientation::Horizontal;
    for (uint64_t seed = 500; seed < 560; ++seed) {
        RandomInstance inst = random_instance(seed, 80, 2);
        VerifyReport rep = verify_query(inst.table, inst.query, horiz);
        CAPTURE(seed);
        REQUIRE(rep.pass());
    }
}

TEST_CASE("override soundness: re-evaluated parameter equals re-bound query") {
    Table t = cv_table();
    // Compile with threshold 60, then override the lifted literal to 30 and
    // check against the oracle on the substituted query.
    BoundQuery bq60 = bound("SELECT Club, Cost FROM Purchases WHERE Cost > 60", t);
    CompileResult c = compile(bq60, t, {});
    REQUIRE(c.plan.params.size() == 1);
    std::string pname = c.plan.params.begin()->first;
    ValueGrid vg = evaluate(c.workbook, {{pname, Value::number(30)}});
    GridResult g = extract_grid_result(vg, c.plan);
    BoundQuery bq30 = bound("SELECT Club, Cost FROM Purchases WHERE Cost > 30", t);
    VerifyReport rep = compare_results(oracle_select(t, bq30), g);
    CHECK(rep.pass());
}

TEST_CASE("naive single-key mode fails verification exactly on tied keys") {
    Table t = load_table("Club,Pop\nA,10\nB,10\nC,5\n", "t");
    Query q = parse_query("SELECT Club FROM t ORDER BY Pop DESC");
    CompileOptions naive;
    naive.surrogate_key = false;
    VerifyReport rep = verify_query(t, q, Layout{}, naive);
    CHECK(!rep.pass());
    // The tie collapse breaks the tail: slot 2's rownum goes #N/A.
    CHECK(!rep.na_tail_ok);
    // The default surrogate construction passes the same instance.
    CHECK(verify_query(t, q, Layout{}).pass());
}
