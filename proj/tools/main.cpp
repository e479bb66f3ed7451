// sheetql command-line driver: compile | eval | verify
#include "sheetql/compile.hpp"
#include "sheetql/engine.hpp"
#include "sheetql/errors.hpp"
#include "sheetql/gridfile.hpp"
#include "sheetql/query.hpp"
#include "sheetql/table.hpp"
#include "sheetql/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#if defined(_WIN32)
#include <io.h>
#define SHEETQL_ISATTY(fd) _isatty(fd)
#else
#include <unistd.h>
#define SHEETQL_ISATTY(fd) isatty(fd)
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1; // parse/bind/compile/verify failures
constexpr int kExitIo = 2;     // unreadable or unwritable files

// Thrown for file-system problems so they exit with kExitIo.
struct IoFailure {
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure{"cannot read '" + path + "'"};
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw IoFailure{"read error on '" + path + "'"};
    return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoFailure{"cannot write '" + path + "'"};
    out << content;
    out.flush();
    if (!out)
        throw IoFailure{"write error on '" + path + "'"};
}

bool color_enabled() {
    if (std::getenv("SHEETQL_NO_COLOR"))
        return false;
    return SHEETQL_ISATTY(1);
}

// PASS green, FAIL red; only the verdict word is colored.
std::string colorize_report(const std::string& report) {
    if (!color_enabled())
        return report;
    if (report.starts_with("PASS"))
        return "\x1b[32mPASS\x1b[0m" + report.substr(4);
    if (report.starts_with("FAIL"))
        return "\x1b[31mFAIL\x1b[0m" + report.substr(4);
    return report;
}

sheetql::Layout load_layout(const std::string& layout_path) {
    if (layout_path.empty())
        return sheetql::Layout{};
    return sheetql::parse_layout(read_file(layout_path));
}

// `name=value`; a value wrapped in single quotes is text no matter what it
// looks like, anything that parses as a decimal is a number, the rest is text.
std::pair<std::string, sheetql::Value> parse_override(const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        sheetql::fail(sheetql::Errc::BadValue,
                      "override must be NAME=VALUE: '" + assignment + "'");
    std::string name = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);
    if (value.size() >= 2 && value.front() == '\'' && value.back() == '\'')
        return {name, sheetql::Value::text(value.substr(1, value.size() - 2))};
    if (auto num = sheetql::parse_decimal(value))
        return {name, sheetql::Value::number(*num)};
    return {name, sheetql::Value::text(value)};
}

int cmd_compile(const std::string& query_path, const std::string& data_path,
                const std::string& layout_path, const std::string& out_path) {
    sheetql::Query query = sheetql::parse_query(read_file(query_path));
    sheetql::Table table = sheetql::load_table(read_file(data_path), query.source);
    sheetql::Layout layout = load_layout(layout_path);
    sheetql::BoundQuery bq = sheetql::bind_query(query, table);
    sheetql::CompileResult result = sheetql::compile(bq, table, layout);
    write_file(out_path, sheetql::write_grid(result.workbook));
    write_file(out_path + ".plan", sheetql::write_plan(result.plan));
    return kExitOk;
}

int cmd_eval(const std::string& grid_path, const std::string& out_path,
             const std::vector<std::string>& override_specs, bool na_blank) {
    sheetql::Workbook wb = sheetql::read_grid(read_file(grid_path));
    std::map<std::string, sheetql::Value> overrides;
    for (const std::string& assignment : override_specs)
        overrides.insert(parse_override(assignment));
    sheetql::ValueGrid grid = sheetql::evaluate(wb, overrides);
    std::string values = sheetql::write_values(wb, grid, {na_blank});
    if (out_path.empty())
        std::fputs(values.c_str(), stdout);
    else
        write_file(out_path, values);
    return kExitOk;
}

int cmd_verify(const std::string& query_path, const std::string& data_path,
               const std::string& layout_path, int random_count, uint64_t seed) {
    sheetql::Layout layout = load_layout(layout_path);
    bool all_pass = true;
    if (random_count > 0) {
        for (int i = 0; i < random_count; ++i) {
            sheetql::RandomInstance inst =
                sheetql::random_instance(seed + static_cast<uint64_t>(i), 200, 3);
            sheetql::VerifyReport report =
                sheetql::verify_query(inst.table, inst.query, layout);
            std::fputs(colorize_report(sheetql::render_report(report)).c_str(), stdout);
            all_pass = all_pass && report.pass();
        }
    } else {
        sheetql::Query query = sheetql::parse_query(read_file(query_path));
        sheetql::Table table = sheetql::load_table(read_file(data_path), query.source);
        sheetql::VerifyReport report = sheetql::verify_query(table, query, layout);
        std::fputs(colorize_report(sheetql::render_report(report)).c_str(), stdout);
        all_pass = report.pass();
    }
    return all_pass ? kExitOk : kExitDomain;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compile a SELECT query over CSV data into a self-recalculating "
                 "formula grid, evaluate grids, and verify them against a "
                 "relational oracle"};
    app.require_subcommand(1);

    std::string query_path, data_path, layout_path, out_path, grid_path;
    std::vector<std::string> override_specs;
    bool na_blank = false;
    int random_count = 0;
    uint64_t seed = 1;

    CLI::App* compile_cmd =
        app.add_subcommand("compile", "Compile a query file into a formula grid + plan");
    compile_cmd->add_option("query", query_path, "Query file")->required();
    compile_cmd->add_option("--data", data_path, "Source CSV file")->required();
    compile_cmd->add_option("--layout", layout_path, "Layout config file");
    compile_cmd->add_option("--out", out_path, "Grid output path (plan goes to <out>.plan)")
        ->required();

    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a formula grid to values");
    eval_cmd->add_option("grid", grid_path, "Grid file")->required();
    eval_cmd->add_option("--out", out_path, "Values output path (stdout when omitted)");
    eval_cmd->add_option("--set", override_specs, "Parameter override NAME=VALUE (repeatable)");
    eval_cmd->add_flag("--na-blank", na_blank, "Render #N/A cells as empty fields");

    CLI::App* verify_cmd =
        app.add_subcommand("verify", "Differential-test compiled grids against the oracle");
    verify_cmd->add_option("query", query_path, "Query file (fixed mode)");
    verify_cmd->add_option("--data", data_path, "Source CSV file (fixed mode)");
    verify_cmd->add_option("--layout", layout_path, "Layout config file");
    verify_cmd->add_option("--random", random_count, "Run N generated instances");
    verify_cmd->add_option("--seed", seed, "Seed for --random");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitIo;
    }

    try {
        if (compile_cmd->parsed())
            return cmd_compile(query_path, data_path, layout_path, out_path);
        if (eval_cmd->parsed())
            return cmd_eval(grid_path, out_path, override_specs, na_blank);
        if (random_count == 0 && (query_path.empty() || data_path.empty())) {
            std::fprintf(stderr, "error: verify needs a query file and --data, or --random N\n");
            return kExitIo;
        }
        return cmd_verify(query_path, data_path, layout_path, random_count, seed);
    } catch (const IoFailure& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return kExitIo;
    } catch (const sheetql::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDomain;
    }
}
