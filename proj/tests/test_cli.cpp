// End-to-end tests for the sheetql binary: subcommands, exit codes, files.
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

// Exit codes the driver commits to.
constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kIo = 2;

struct TempDir {
    std::string path;

    TempDir() {
        char tmpl[] = "/tmp/sheetql_cli_XXXXXX";
        char* made = mkdtemp(tmpl);
        REQUIRE(made != nullptr);
        path = made;
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
    REQUIRE(out.good());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

bool file_exists(const std::string& path) {
    return std::ifstream(path).good();
}

// Runs the binary with stdout/stderr captured into the temp dir.
int run(const TempDir& dir, const std::string& args) {
    std::string cmd = std::string("SHEETQL_NO_COLOR=1 \"") + SHEETQL_BIN + "\" " + args +
                      " > " + dir.file("stdout.txt") + " 2> " + dir.file("stderr.txt");
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

const char* kCsv = "Club,Product,Cost,Pop\n"
                   "689,GPI,69,422\n"
                   "711,CV,72,4128\n"
                   "689,NVA,72,422\n"
                   "702,AB,5,9\n";

const char* kSql = "SELECT Club, Cost FROM Purchases WHERE Product = 'GPI' "
                   "ORDER BY Cost DESC";

// A minimal grid with one parameter, written by hand so eval output is exact.
const char* kMiniGrid = "== SHEET S ==\n"
                        "=Param_1*2\t7\t=MATCH(1,B1:B1,0)\n"
                        "== SHEET P ==\n"
                        "21\n"
                        "== NAMES ==\n"
                        "Param_1\tP!A1\n"
                        "== PARAMS ==\n"
                        "Param_1\n";

} // namespace

TEST_CASE("compile writes the grid and its plan sidecar") {
    TempDir dir;
    spit(dir.file("q.sql"), kSql);
    spit(dir.file("t.csv"), kCsv);
    int code = run(dir, "compile " + dir.file("q.sql") + " --data " + dir.file("t.csv") +
                            " --out " + dir.file("grid.tsv"));
    CHECK(code == kOk);
    REQUIRE(file_exists(dir.file("grid.tsv")));
    REQUIRE(file_exists(dir.file("grid.tsv.plan")));
    std::string grid = slurp(dir.file("grid.tsv"));
    CHECK(grid.find("== SHEET ") != std::string::npos);
    CHECK(grid.find("== PARAMS ==") != std::string::npos);
    CHECK(grid.find("=IF(") != std::string::npos);
    std::string plan = slurp(dir.file("grid.tsv.plan"));
    CHECK(plan.find("== PLAN ==") != std::string::npos);
    CHECK(plan.find("== RANKS ==") != std::string::npos);
}

TEST_CASE("compiled grids evaluate and re-filter under a parameter override") {
    TempDir dir;
    spit(dir.file("q.sql"), kSql);
    spit(dir.file("t.csv"), kCsv);
    REQUIRE(run(dir, "compile " + dir.file("q.sql") + " --data " + dir.file("t.csv") +
                         " --out " + dir.file("grid.tsv")) == kOk);
    REQUIRE(run(dir, "eval " + dir.file("grid.tsv") + " --out " + dir.file("base.csv")) == kOk);
    REQUIRE(run(dir, "eval " + dir.file("grid.tsv") + " --set Param_1=CV --out " +
                         dir.file("over.csv")) == kOk);
    std::string base = slurp(dir.file("base.csv"));
    std::string over = slurp(dir.file("over.csv"));
    CHECK(base != over);
    // The parameter cell itself shows the substituted value.
    CHECK(base.find("GPI") != std::string::npos);
    CHECK(over.find("CV") != std::string::npos);
}

TEST_CASE("eval prints values to stdout when --out is omitted") {
    TempDir dir;
    spit(dir.file("grid.tsv"), kMiniGrid);
    CHECK(run(dir, "eval " + dir.file("grid.tsv")) == kOk);
    CHECK(slurp(dir.file("stdout.txt")) == "== SHEET S ==\n42,7,#N/A\n== SHEET P ==\n21\n");
}

TEST_CASE("eval --out writes the same values to a file") {
    TempDir dir;
    spit(dir.file("grid.tsv"), kMiniGrid);
    CHECK(run(dir, "eval " + dir.file("grid.tsv") + " --out " + dir.file("v.csv")) == kOk);
    CHECK(slurp(dir.file("v.csv")) == "== SHEET S ==\n42,7,#N/A\n== SHEET P ==\n21\n");
    CHECK(slurp(dir.file("stdout.txt")).empty());
}

TEST_CASE("numeric overrides substitute before evaluation") {
    TempDir dir;
    spit(dir.file("grid.tsv"), kMiniGrid);
    CHECK(run(dir, "eval " + dir.file("grid.tsv") + " --set Param_1=5") == kOk);
    CHECK(slurp(dir.file("stdout.txt")) == "== SHEET S ==\n10,7,#N/A\n== SHEET P ==\n5\n");
}

TEST_CASE("single-quoted overrides force text") {
    TempDir dir;
    spit(dir.file("grid.tsv"), kMiniGrid);
    // Shell keeps the inner quotes; text '5' poisons the arithmetic.
    CHECK(run(dir, "eval " + dir.file("grid.tsv") + " --set \"Param_1='5'\"") == kOk);
    CHECK(slurp(dir.file("stdout.txt")) == "== SHEET S ==\n#VALUE!,7,#N/A\n== SHEET P ==\n5\n");
}

TEST_CASE("eval --na-blank renders missing-value errors as empty fields") {
    TempDir dir;
    spit(dir.file("grid.tsv"), kMiniGrid);
    CHECK(run(dir, "eval " + dir.file("grid.tsv") + " --na-blank") == kOk);
    CHECK(slurp(dir.file("stdout.txt")) == "== SHEET S ==\n42,7,\n== SHEET P ==\n21\n");
}

TEST_CASE("unknown override names fail with the domain exit code") {
    TempDir dir;
    spit(dir.file("grid.tsv"), kMiniGrid);
    CHECK(run(dir, "eval " + dir.file("grid.tsv") + " --set Nope=1") == kDomain);
    CHECK(!slurp(dir.file("stderr.txt")).empty());
}

TEST_CASE("overrides without an equals sign fail with the domain exit code") {
    TempDir dir;
    spit(dir.file("grid.tsv"), kMiniGrid);
    CHECK(run(dir, "eval " + dir.file("grid.tsv") + " --set Param_1") == kDomain);
}

TEST_CASE("verify passes a fixed query against its data") {
    TempDir dir;
    spit(dir.file("q.sql"), kSql);
    spit(dir.file("t.csv"), kCsv);
    CHECK(run(dir, "verify " + dir.file("q.sql") + " --data " + dir.file("t.csv")) == kOk);
    CHECK(slurp(dir.file("stdout.txt")) == "PASS\n");
}

TEST_CASE("verify --random reports one verdict per generated instance") {
    TempDir dir;
    CHECK(run(dir, "verify --random 5 --seed 42") == kOk);
    CHECK(slurp(dir.file("stdout.txt")) == "PASS\nPASS\nPASS\nPASS\nPASS\n");
}

TEST_CASE("compile honors a layout file") {
    TempDir dir;
    spit(dir.file("q.sql"), kSql);
    spit(dir.file("t.csv"), kCsv);
    spit(dir.file("layout.cfg"), "# transpose everything\norientation = horizontal\n");
    CHECK(run(dir, "compile " + dir.file("q.sql") + " --data " + dir.file("t.csv") +
                       " --layout " + dir.file("layout.cfg") + " --out " +
                       dir.file("grid.tsv")) == kOk);
    CHECK(slurp(dir.file("grid.tsv.plan")).find("orientation\thorizontal") !=
          std::string::npos);
    // The transposed grid still verifies.
    CHECK(run(dir, "verify " + dir.file("q.sql") + " --data " + dir.file("t.csv") +
                       " --layout " + dir.file("layout.cfg")) == kOk);
    CHECK(slurp(dir.file("stdout.txt")) == "PASS\n");
}

TEST_CASE("missing input files exit with the I/O code") {
    TempDir dir;
    spit(dir.file("t.csv"), kCsv);
    CHECK(run(dir, "compile " + dir.file("absent.sql") + " --data " + dir.file("t.csv") +
                       " --out " + dir.file("grid.tsv")) == kIo);
    CHECK(run(dir, "eval " + dir.file("absent.tsv")) == kIo);
    CHECK(!slurp(dir.file("stderr.txt")).empty());
}

TEST_CASE("invalid command lines exit with the I/O code") {
    TempDir dir;
    CHECK(run(dir, "") == kIo);                  // no subcommand
    CHECK(run(dir, "eval") == kIo);              // missing required positional
    CHECK(run(dir, "compile --bogus x") == kIo); // unknown flag
    CHECK(run(dir, "verify") == kIo);            // neither fixed inputs nor --random
}

TEST_CASE("unparseable queries exit with the domain code") {
    TempDir dir;
    spit(dir.file("q.sql"), "SELECT FROM Purchases");
    spit(dir.file("t.csv"), kCsv);
    CHECK(run(dir, "compile " + dir.file("q.sql") + " --data " + dir.file("t.csv") +
                       " --out " + dir.file("grid.tsv")) == kDomain);
    CHECK(!slurp(dir.file("stderr.txt")).empty());
    CHECK(!file_exists(dir.file("grid.tsv")));
}

TEST_CASE("surrogate key capacity overflow exits with the domain code") {
    TempDir dir;
    std::string csv = "V,K1,K2,K3,K4,K5\n";
    for (int i = 0; i < 1297; ++i) {
        std::string row = std::to_string(i);
        for (int k = 1; k <= 5; ++k)
            row += "," + std::to_string((i * k) % 9);
        csv += row + "\n";
    }
    spit(dir.file("t.csv"), csv);
    spit(dir.file("q.sql"), "SELECT V FROM T ORDER BY K1, K2, K3, K4, K5");
    CHECK(run(dir, "compile " + dir.file("q.sql") + " --data " + dir.file("t.csv") +
                       " --out " + dir.file("grid.tsv")) == kDomain);
    CHECK(slurp(dir.file("stderr.txt")).find("1297") != std::string::npos);
    // Two keys over the same data stay within capacity.
    spit(dir.file("q2.sql"), "SELECT V FROM T ORDER BY K1, K2");
    CHECK(run(dir, "compile " + dir.file("q2.sql") + " --data " + dir.file("t.csv") +
                       " --out " + dir.file("grid.tsv")) == kOk);
}

TEST_CASE("malformed grid input exits with the domain code") {
    TempDir dir;
    spit(dir.file("grid.tsv"), "== SHEET A ==\n1\n== SHEET A ==\n2\n");
    CHECK(run(dir, "eval " + dir.file("grid.tsv")) == kDomain);
    CHECK(!slurp(dir.file("stderr.txt")).empty());
}

TEST_CASE("mismatching data columns exit with the domain code") {
    TempDir dir;
    spit(dir.file("q.sql"), "SELECT Nope FROM Purchases");
    spit(dir.file("t.csv"), kCsv);
    CHECK(run(dir, "compile " + dir.file("q.sql") + " --data " + dir.file("t.csv") +
                       " --out " + dir.file("grid.tsv")) == kDomain);
}
