#include "sheetql/gridfile.hpp"

#include "sheetql/errors.hpp"
#include "sheetql/table.hpp"

#include <cstdlib>
#include <string>
#include <vector>

namespace sheetql {

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size())
                lines.emplace_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

bool is_section_header(const std::string& line) {
    return line.size() >= 5 && line.starts_with("== ") && line.ends_with(" ==");
}

std::string section_name(const std::string& line) {
    return line.substr(3, line.size() - 6);
}

int parse_index(const std::string& text, Errc errc, const std::string& what) {
    if (text.empty())
        fail(errc, what + ": empty number");
    char* end = nullptr;
    long v = std::strtol(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size() || v < -1000000000L || v > 1000000000L)
        fail(errc, what + ": bad number '" + text + "'");
    return static_cast<int>(v);
}

long long parse_wide(const std::string& text, Errc errc, const std::string& what) {
    if (text.empty())
        fail(errc, what + ": empty number");
    char* end = nullptr;
    long long v = std::strtoll(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size())
        fail(errc, what + ": bad number '" + text + "'");
    return v;
}

// A name target is a fully qualified cell or range; a 1x1 `A2:A2` form
// collapses to the plain address.
NameTarget parse_name_target(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        // May still be a plain address when the colon sits inside a quoted
        // sheet name, so try the address form first.
        try {
            return parse_a1_addr(text, "");
        } catch (const Error&) {
        }
        CellRange range = parse_a1_range(text, "");
        if (range.size() == 1)
            return CellAddr{range.sheet, range.col_start, range.row_start};
        return range;
    }
    return parse_a1_addr(text, "");
}

std::string render_name_target(const NameTarget& target) {
    if (const auto* addr = std::get_if<CellAddr>(&target))
        return render_a1(*addr);
    return render_a1(std::get<CellRange>(target));
}

void check_grid_text(const std::string& text, const std::string& sheet, int row, int col) {
    if (text.find_first_of("\t\r\n") != std::string::npos)
        fail(Errc::BadValue, "text cell with tab or line break cannot be stored (sheet '" +
                                 sheet + "', row " + std::to_string(row) + ", col " +
                                 std::to_string(col) + ")");
    if (!text.empty() && text.front() == '=')
        fail(Errc::BadValue, "text cell starting with '=' cannot be stored (sheet '" + sheet +
                                 "', row " + std::to_string(row) + ", col " +
                                 std::to_string(col) + ")");
}

} // namespace

std::string write_grid(const Workbook& wb) {
    std::string out;
    for (const std::string& sheet_name : wb.sheet_order) {
        const Sheet& sheet = wb.sheets.at(sheet_name);
        out += "== SHEET " + sheet_name + " ==\n";
        int max_row = sheet.max_row();
        auto it = sheet.cells.begin();
        for (int row = 1; row <= max_row; ++row) {
            std::string line;
            int last_col = 0;
            while (it != sheet.cells.end() && it->first.first == row) {
                int col = it->first.second;
                for (int fill = last_col + 1; fill < col; ++fill)
                    line += '\t';
                if (last_col > 0)
                    line += '\t';
                const Cell& cell = it->second;
                if (const auto* num = std::get_if<double>(&cell.content)) {
                    line += canonical_number(*num);
                } else if (const auto* text = std::get_if<std::string>(&cell.content)) {
                    check_grid_text(*text, sheet_name, row, col);
                    line += *text;
                } else {
                    line += render_formula(std::get<ExprPtr>(cell.content), sheet_name);
                }
                last_col = col;
                ++it;
            }
            if (is_section_header(line))
                fail(Errc::BadValue, "row renders as a section header (sheet '" + sheet_name +
                                         "', row " + std::to_string(row) + ")");
            out += line;
            out += '\n';
        }
    }
    out += "== NAMES ==\n";
    for (const auto& [name, target] : wb.names)
        out += name + "\t" + render_name_target(target) + "\n";
    out += "== PARAMS ==\n";
    for (const auto& [name, addr] : wb.params)
        out += name + "\n";
    return out;
}

Workbook read_grid(std::string_view text) {
    Workbook wb;
    enum class Mode { Preamble, SheetRows, Names, Params };
    Mode mode = Mode::Preamble;
    Sheet* sheet = nullptr;
    std::string sheet_name;
    int row = 0;
    bool saw_names = false, saw_params = false;

    for (const std::string& line : split_lines(text)) {
        if (is_section_header(line)) {
            std::string name = section_name(line);
            if (name.starts_with("SHEET ")) {
                if (saw_names || saw_params)
                    fail(Errc::MalformedGrid, "sheet section after NAMES/PARAMS");
                sheet_name = name.substr(6);
                if (sheet_name.empty())
                    fail(Errc::MalformedGrid, "empty sheet name");
                if (wb.sheets.count(sheet_name))
                    fail(Errc::MalformedGrid, "duplicate sheet section '" + sheet_name + "'");
                sheet = &wb.add_sheet(sheet_name);
                row = 0;
                mode = Mode::SheetRows;
            } else if (name == "NAMES") {
                if (saw_names)
                    fail(Errc::MalformedGrid, "duplicate NAMES section");
                saw_names = true;
                mode = Mode::Names;
            } else if (name == "PARAMS") {
                if (saw_params)
                    fail(Errc::MalformedGrid, "duplicate PARAMS section");
                saw_params = true;
                mode = Mode::Params;
            } else {
                fail(Errc::MalformedGrid, "unknown section '" + name + "'");
            }
            continue;
        }
        switch (mode) {
        case Mode::Preamble:
            if (!line.empty())
                fail(Errc::MalformedGrid, "content before first section: '" + line + "'");
            break;
        case Mode::SheetRows: {
            ++row;
            std::vector<std::string> fields = split_tabs(line);
            for (size_t c = 0; c < fields.size(); ++c) {
                const std::string& field = fields[c];
                if (field.empty())
                    continue;
                int col = static_cast<int>(c) + 1;
                if (field.front() == '=') {
                    sheet->set_formula(row, col, parse_formula(field, sheet_name));
                } else if (auto num = parse_decimal(field)) {
                    sheet->set_number(row, col, *num);
                } else {
                    sheet->set_text(row, col, field);
                }
            }
            break;
        }
        case Mode::Names: {
            if (line.empty())
                break;
            size_t tab = line.find('\t');
            if (tab == std::string::npos || tab == 0)
                fail(Errc::MalformedGrid, "NAMES line needs 'name<TAB>target': '" + line + "'");
            std::string name = line.substr(0, tab);
            if (wb.names.count(name))
                fail(Errc::MalformedGrid, "duplicate name '" + name + "'");
            NameTarget target = parse_name_target(line.substr(tab + 1));
            const std::string& target_sheet = std::holds_alternative<CellAddr>(target)
                                                  ? std::get<CellAddr>(target).sheet
                                                  : std::get<CellRange>(target).sheet;
            if (target_sheet.empty())
                fail(Errc::MalformedGrid, "name '" + name + "' target must be sheet-qualified");
            wb.names.emplace(std::move(name), std::move(target));
            break;
        }
        case Mode::Params: {
            if (line.empty())
                break;
            auto it = wb.names.find(line);
            if (it == wb.names.end())
                fail(Errc::MalformedGrid, "param '" + line + "' is not a declared name");
            const auto* addr = std::get_if<CellAddr>(&it->second);
            if (!addr)
                fail(Errc::MalformedGrid, "param '" + line + "' must name a single cell");
            const Sheet* psheet = wb.find_sheet(addr->sheet);
            const Cell* cell = psheet ? psheet->find(addr->row, addr->col) : nullptr;
            if (!cell || cell->is_formula())
                fail(Errc::MalformedGrid, "param '" + line + "' must point at a literal cell");
            wb.params.emplace(line, *addr);
            break;
        }
        }
    }
    for (const auto& [name, target] : wb.names) {
        const std::string& target_sheet = std::holds_alternative<CellAddr>(target)
                                              ? std::get<CellAddr>(target).sheet
                                              : std::get<CellRange>(target).sheet;
        if (!wb.sheets.count(target_sheet))
            fail(Errc::MalformedGrid,
                 "name '" + name + "' targets unknown sheet '" + target_sheet + "'");
    }
    return wb;
}

// ------------------------------------------------------------------- plan

namespace {

const char* dir_word(SortDir dir) {
    return dir == SortDir::Descending ? "desc" : "asc";
}

SortDir parse_dir(const std::string& word) {
    if (word == "desc")
        return SortDir::Descending;
    if (word == "asc")
        return SortDir::Ascending;
    fail(Errc::MalformedPlan, "bad sort direction '" + word + "'");
}

void write_block(std::string& out, const ExtractionBlock& blk) {
    out += "sheet\t" + blk.sheet + "\n";
    out += "seq_col\t" + std::to_string(blk.seq_col) + "\n";
    out += "rownum_col\t" + std::to_string(blk.rownum_col) + "\n";
    out += "n_slots\t" + std::to_string(blk.n_slots) + "\n";
    out += "n_projected\t" + std::to_string(blk.n_projected) + "\n";
    for (const ValueColumn& vc : blk.value_cols)
        out += "value\t" + std::to_string(vc.source_col) + "\t" + std::to_string(vc.block_col) +
               "\t" + vc.name + "\n";
}

struct PlanLines {
    // Section name -> its lines, in file order.
    std::vector<std::pair<std::string, std::vector<std::string>>> sections;
};

PlanLines split_plan_sections(std::string_view text) {
    PlanLines out;
    bool in_section = false;
    for (const std::string& line : split_lines(text)) {
        if (is_section_header(line)) {
            out.sections.emplace_back(section_name(line), std::vector<std::string>{});
            in_section = true;
            continue;
        }
        if (line.empty())
            continue;
        if (!in_section)
            fail(Errc::MalformedPlan, "content before first section: '" + line + "'");
        out.sections.back().second.push_back(line);
    }
    return out;
}

ExtractionBlock parse_block(const std::vector<std::string>& lines) {
    ExtractionBlock blk;
    bool saw_sheet = false, saw_seq = false, saw_rownum = false, saw_slots = false,
         saw_projected = false;
    for (const std::string& line : lines) {
        std::vector<std::string> f = split_tabs(line);
        if (f[0] == "value") {
            if (f.size() != 4)
                fail(Errc::MalformedPlan, "value line needs 4 fields: '" + line + "'");
            blk.value_cols.push_back({parse_index(f[1], Errc::MalformedPlan, "value source_col"),
                                      parse_index(f[2], Errc::MalformedPlan, "value block_col"),
                                      f[3]});
            continue;
        }
        if (f.size() != 2)
            fail(Errc::MalformedPlan, "block line needs 'key<TAB>value': '" + line + "'");
        if (f[0] == "sheet") {
            blk.sheet = f[1];
            saw_sheet = true;
        } else if (f[0] == "seq_col") {
            blk.seq_col = parse_index(f[1], Errc::MalformedPlan, "seq_col");
            saw_seq = true;
        } else if (f[0] == "rownum_col") {
            blk.rownum_col = parse_index(f[1], Errc::MalformedPlan, "rownum_col");
            saw_rownum = true;
        } else if (f[0] == "n_slots") {
            blk.n_slots = parse_index(f[1], Errc::MalformedPlan, "n_slots");
            saw_slots = true;
        } else if (f[0] == "n_projected") {
            blk.n_projected = parse_index(f[1], Errc::MalformedPlan, "n_projected");
            saw_projected = true;
        } else {
            fail(Errc::MalformedPlan, "unknown block key '" + f[0] + "'");
        }
    }
    if (!saw_sheet || !saw_seq || !saw_rownum || !saw_slots || !saw_projected)
        fail(Errc::MalformedPlan, "extraction block is missing required keys");
    return blk;
}

} // namespace

std::string write_plan(const CompilationPlan& plan) {
    std::string out = "== PLAN ==\n";
    out += std::string("orientation\t") +
           (plan.orientation == Orientation::Vertical ? "vertical" : "horizontal") + "\n";
    out += "source_sheet\t" + plan.source_sheet + "\n";
    out += "header_index\t" + std::to_string(plan.header_index) + "\n";
    out += "data_start\t" + std::to_string(plan.data_start) + "\n";
    out += "n_rows\t" + std::to_string(plan.n_rows) + "\n";
    out += "indicator_col\t" + std::to_string(plan.indicator_col) + "\n";
    out += "seqno_col\t" + std::to_string(plan.seqno_col) + "\n";
    out += "base_a\t" + std::to_string(plan.base_a) + "\n";
    out += std::string("surrogate_key\t") + (plan.surrogate_key ? "1" : "0") + "\n";
    if (plan.sk_col)
        out += "sk_col\t" + std::to_string(*plan.sk_col) + "\n";
    if (plan.sk_rank_col)
        out += "sk_rank_col\t" + std::to_string(*plan.sk_rank_col) + "\n";
    out += "== WHERE ==\n";
    write_block(out, plan.where_block);
    if (!plan.rank_cols.empty()) {
        out += "== RANKS ==\n";
        for (const RankColumn& rc : plan.rank_cols)
            out += "rank\t" + std::to_string(rc.key_source_col) + "\t" + dir_word(rc.dir) +
                   "\t" + std::to_string(rc.key_block_col) + "\t" +
                   std::to_string(rc.block_col) + "\t" + rc.name + "\n";
    }
    if (plan.order_block) {
        out += "== ORDERED ==\n";
        write_block(out, *plan.order_block);
    }
    out += "== PARAMS ==\n";
    for (const auto& [name, addr] : plan.params)
        out += name + "\t" + render_a1(addr) + "\n";
    return out;
}

CompilationPlan read_plan(std::string_view text) {
    PlanLines sections = split_plan_sections(text);
    CompilationPlan plan;
    bool saw_plan = false, saw_where = false, saw_ranks = false, saw_ordered = false;

    for (const auto& [name, lines] : sections.sections) {
        if (name == "PLAN") {
            if (saw_plan)
                fail(Errc::MalformedPlan, "duplicate PLAN section");
            saw_plan = true;
            bool saw_orient = false, saw_source = false, saw_rows = false;
            for (const std::string& line : lines) {
                std::vector<std::string> f = split_tabs(line);
                if (f.size() != 2)
                    fail(Errc::MalformedPlan, "PLAN line needs 'key<TAB>value': '" + line + "'");
                const std::string& key = f[0];
                const std::string& value = f[1];
                if (key == "orientation") {
                    if (value == "vertical")
                        plan.orientation = Orientation::Vertical;
                    else if (value == "horizontal")
                        plan.orientation = Orientation::Horizontal;
                    else
                        fail(Errc::MalformedPlan, "bad orientation '" + value + "'");
                    saw_orient = true;
                } else if (key == "source_sheet") {
                    plan.source_sheet = value;
                    saw_source = true;
                } else if (key == "header_index") {
                    plan.header_index = parse_index(value, Errc::MalformedPlan, key);
                } else if (key == "data_start") {
                    plan.data_start = parse_index(value, Errc::MalformedPlan, key);
                } else if (key == "n_rows") {
                    plan.n_rows = parse_index(value, Errc::MalformedPlan, key);
                    saw_rows = true;
                } else if (key == "indicator_col") {
                    plan.indicator_col = parse_index(value, Errc::MalformedPlan, key);
                } else if (key == "seqno_col") {
                    plan.seqno_col = parse_index(value, Errc::MalformedPlan, key);
                } else if (key == "base_a") {
                    plan.base_a = parse_wide(value, Errc::MalformedPlan, key);
                } else if (key == "surrogate_key") {
                    if (value != "0" && value != "1")
                        fail(Errc::MalformedPlan, "surrogate_key must be 0 or 1");
                    plan.surrogate_key = value == "1";
                } else if (key == "sk_col") {
                    plan.sk_col = parse_index(value, Errc::MalformedPlan, key);
                } else if (key == "sk_rank_col") {
                    plan.sk_rank_col = parse_index(value, Errc::MalformedPlan, key);
                } else {
                    fail(Errc::MalformedPlan, "unknown PLAN key '" + key + "'");
                }
            }
            if (!saw_orient || !saw_source || !saw_rows)
                fail(Errc::MalformedPlan, "PLAN section is missing required keys");
        } else if (name == "WHERE") {
            if (saw_where)
                fail(Errc::MalformedPlan, "duplicate WHERE section");
            saw_where = true;
            plan.where_block = parse_block(lines);
        } else if (name == "RANKS") {
            if (saw_ranks)
                fail(Errc::MalformedPlan, "duplicate RANKS section");
            saw_ranks = true;
            for (const std::string& line : lines) {
                std::vector<std::string> f = split_tabs(line);
                if (f.size() != 6 || f[0] != "rank")
                    fail(Errc::MalformedPlan, "rank line needs 6 fields: '" + line + "'");
                RankColumn rc;
                rc.key_source_col = parse_index(f[1], Errc::MalformedPlan, "rank key_source_col");
                rc.dir = parse_dir(f[2]);
                rc.key_block_col = parse_index(f[3], Errc::MalformedPlan, "rank key_block_col");
                rc.block_col = parse_index(f[4], Errc::MalformedPlan, "rank block_col");
                rc.name = f[5];
                plan.rank_cols.push_back(std::move(rc));
            }
        } else if (name == "ORDERED") {
            if (saw_ordered)
                fail(Errc::MalformedPlan, "duplicate ORDERED section");
            saw_ordered = true;
            plan.order_block = parse_block(lines);
        } else if (name == "PARAMS") {
            for (const std::string& line : lines) {
                size_t tab = line.find('\t');
                if (tab == std::string::npos || tab == 0)
                    fail(Errc::MalformedPlan,
                         "PARAMS line needs 'name<TAB>cell': '" + line + "'");
                std::string pname = line.substr(0, tab);
                CellAddr addr = parse_a1_addr(line.substr(tab + 1), "");
                if (addr.sheet.empty())
                    fail(Errc::MalformedPlan, "param target must be sheet-qualified");
                plan.params.emplace(std::move(pname), std::move(addr));
            }
        } else {
            fail(Errc::MalformedPlan, "unknown section '" + name + "'");
        }
    }
    if (!saw_plan || !saw_where)
        fail(Errc::MalformedPlan, "plan needs PLAN and WHERE sections");
    if (saw_ranks != saw_ordered)
        fail(Errc::MalformedPlan, "RANKS and ORDERED sections must appear together");
    return plan;
}

// ------------------------------------------------------------------ values

std::string write_values(const Workbook& wb, const ValueGrid& grid,
                         const ValuesOptions& options) {
    std::string out;
    for (const std::string& sheet_name : wb.sheet_order) {
        out += "== SHEET " + sheet_name + " ==\n";
        auto it = grid.sheets.find(sheet_name);
        if (it == grid.sheets.end())
            continue;
        const SheetValues& sv = it->second;
        for (int row = 1; row <= sv.n_rows; ++row) {
            std::string line;
            for (int col = 1; col <= sv.n_cols; ++col) {
                if (col > 1)
                    line += ',';
                const std::optional<Value>& v = sv.at(row, col);
                if (!v)
                    continue;
                if (options.na_blank && v->is_na())
                    continue;
                if (v->is_text())
                    line += csv_quote(v->as_text());
                else
                    line += v->display();
            }
            out += line;
            out += '\n';
        }
    }
    return out;
}

} // namespace sheetql
