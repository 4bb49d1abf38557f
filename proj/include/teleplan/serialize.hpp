#ifndef TELEPLAN_SERIALIZE_HPP
#define TELEPLAN_SERIALIZE_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "teleplan/cells.hpp"
#include "teleplan/closedform.hpp"
#include "teleplan/entropy.hpp"
#include "teleplan/errors.hpp"
#include "teleplan/parse.hpp"
#include "teleplan/plan.hpp"

namespace teleplan {

using ojson = nlohmann::ordered_json;

namespace detail {

/// Entropy-table entries sorted by subset size, then lexicographically by
/// unit names.
inline std::vector<std::uint32_t> sorted_masks(const CutEntropyTable& table) {
    std::vector<std::uint32_t> masks;
    const std::uint32_t full = (1u << table.units()) - 1;
    for (std::uint32_t m = 1; m <= full; ++m) masks.push_back(m);
    auto names_of = [&table](std::uint32_t mask) {
        std::vector<std::string> names;
        for (int u = 0; u < table.units(); ++u)
            if ((mask >> u) & 1) names.push_back(table.unit_names[u]);
        return names;
    };
    std::sort(masks.begin(), masks.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                  const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
                  if (pa != pb) return pa < pb;
                  return names_of(a) < names_of(b);
              });
    return masks;
}

} // namespace detail

inline ojson entropy_table_document(const CutEntropyTable& table,
                                    bool include_full = false) {
    ojson doc;
    doc["units"] = table.unit_names;
    ojson entries = ojson::array();
    for (std::uint32_t mask : detail::sorted_masks(table)) {
        const bool full = mask == (1u << table.units()) - 1;
        if (full && !include_full) continue;
        ojson entry;
        ojson subset = ojson::array();
        for (int u = 0; u < table.units(); ++u)
            if ((mask >> u) & 1) subset.push_back(table.unit_names[u]);
        entry["subset"] = std::move(subset);
        entry["ebits"] = table.at(mask);
        entries.push_back(std::move(entry));
    }
    doc["entries"] = std::move(entries);
    return doc;
}

inline ojson layout_document(const CellLayout& layout) {
    ojson doc;
    doc["derivation"] = layout.derivation;
    doc["parties"] = layout.party_names;
    doc["factor_dims"] = layout.factor_dims;
    ojson owners = ojson::array();
    for (int p : layout.factor_owner) owners.push_back(layout.party_names[p]);
    doc["factor_owner"] = std::move(owners);
    ojson cells = ojson::array();
    for (const Cell& cell : layout.cells) {
        ojson c;
        c["name"] = cell.name;
        c["owner"] = layout.party_names[cell.owner];
        c["dim"] = cell.dim;
        c["factors"] = cell.factors;
        cells.push_back(std::move(c));
    }
    doc["cells"] = std::move(cells);
    return doc;
}

/// Full plan document: everything needed to re-verify the plan offline.
inline ojson plan_document(const PlanResult& result) {
    const CellLayout& layout = result.layout;
    ojson doc;
    doc["protocol"] = result.plan.protocol;
    if (result.plan.root >= 0)
        doc["root"] = layout.party_names[result.plan.root];
    else
        doc["root"] = nullptr;
    if (result.plan.start) {
        ojson start;
        for (int c = 0; c < layout.num_cells(); ++c)
            start[layout.cells[c].name] =
                layout.party_names[(*result.plan.start)[c]];
        doc["start"] = std::move(start);
    }
    doc["total_ebits"] = result.plan.total_ebits;
    ojson steps = ojson::array();
    for (const TeleportStep& step : result.plan.steps) {
        ojson s;
        ojson moved = ojson::array();
        for (int c : step.moved) moved.push_back(layout.cells[c].name);
        s["moved"] = std::move(moved);
        s["from"] = layout.party_names[step.source];
        s["to"] = layout.party_names[step.dest];
        s["cost_ebits"] = step.cost_ebits;
        steps.push_back(std::move(s));
    }
    doc["steps"] = std::move(steps);
    doc["layout"] = layout_document(layout);
    doc["entropy_table"] = entropy_table_document(result.table);
    doc["state"] = render(result.state);
    return doc;
}

/// Rebuild a plan result from its document. Throws ParseError on structural
/// problems; entropy values are recomputed, not trusted.
inline PlanResult plan_from_document(const ojson& doc) {
    auto need = [&doc](const char* key) -> const ojson& {
        if (!doc.contains(key))
            throw ParseError(1, 1, std::string("plan document missing '") + key + "'");
        return doc.at(key);
    };
    PlanResult result;
    result.state = parse_state_text(need("state").get<std::string>());

    const ojson& ldoc = need("layout");
    CellLayout layout;
    layout.derivation = ldoc.value("derivation", "unknown");
    layout.party_names = ldoc.at("parties").get<std::vector<std::string>>();
    layout.num_parties = static_cast<int>(layout.party_names.size());
    layout.factor_dims = ldoc.at("factor_dims").get<std::vector<int>>();
    for (const auto& owner : ldoc.at("factor_owner")) {
        const std::string name = owner.get<std::string>();
        int idx = -1;
        for (int p = 0; p < layout.num_parties; ++p)
            if (layout.party_names[p] == name) idx = p;
        if (idx < 0) throw ParseError(1, 1, "unknown party in layout", name);
        layout.factor_owner.push_back(idx);
    }
    for (const auto& cdoc : ldoc.at("cells")) {
        Cell cell;
        cell.name = cdoc.at("name").get<std::string>();
        const std::string owner = cdoc.at("owner").get<std::string>();
        cell.owner = -1;
        for (int p = 0; p < layout.num_parties; ++p)
            if (layout.party_names[p] == owner) cell.owner = p;
        if (cell.owner < 0) throw ParseError(1, 1, "unknown cell owner", owner);
        cell.factors = cdoc.at("factors").get<std::vector<int>>();
        cell.dim = 1;
        for (int f : cell.factors) {
            if (f < 0 || f >= static_cast<int>(layout.factor_dims.size()))
                throw ParseError(1, 1, "cell factor index out of range");
            cell.dim *= layout.factor_dims[f];
        }
        layout.cells.push_back(std::move(cell));
    }
    result.layout = layout;

    TeleportPlan plan;
    plan.protocol = need("protocol").get<std::string>();
    const ojson& root = need("root");
    plan.root = -1;
    if (!root.is_null()) {
        const std::string name = root.get<std::string>();
        for (int p = 0; p < layout.num_parties; ++p)
            if (layout.party_names[p] == name) plan.root = p;
        if (plan.root < 0) throw ParseError(1, 1, "unknown root party", name);
    }
    if (doc.contains("start")) {
        std::vector<int> start(layout.num_cells(), -1);
        for (const auto& [cell_name, party] : doc.at("start").items()) {
            const int c = layout.cell_index(cell_name);
            if (c < 0) throw ParseError(1, 1, "unknown cell in start", cell_name);
            const std::string pname = party.get<std::string>();
            for (int p = 0; p < layout.num_parties; ++p)
                if (layout.party_names[p] == pname) start[c] = p;
            if (start[c] < 0) throw ParseError(1, 1, "unknown party in start", pname);
        }
        for (int v : start)
            if (v < 0) throw ParseError(1, 1, "start omits a cell");
        plan.start = std::move(start);
    }
    plan.total_ebits = need("total_ebits").get<double>();
    for (const auto& sdoc : need("steps")) {
        TeleportStep step;
        for (const auto& name : sdoc.at("moved")) {
            const int c = layout.cell_index(name.get<std::string>());
            if (c < 0)
                throw ParseError(1, 1, "unknown cell in step",
                                 name.get<std::string>());
            step.moved.push_back(c);
        }
        std::sort(step.moved.begin(), step.moved.end());
        auto party_of = [&layout](const std::string& name) {
            for (int p = 0; p < layout.num_parties; ++p)
                if (layout.party_names[p] == name) return p;
            throw ParseError(1, 1, "unknown party in step", name);
        };
        step.source = party_of(sdoc.at("from").get<std::string>());
        step.dest = party_of(sdoc.at("to").get<std::string>());
        step.cost_ebits = sdoc.at("cost_ebits").get<double>();
        plan.steps.push_back(std::move(step));
    }
    result.plan = std::move(plan);
    return result;
}

inline ojson cross_validation_document(const CrossValidationReport& report) {
    ojson doc;
    ojson rows = ojson::array();
    for (const CrossCheckRow& row : report.rows) {
        ojson r;
        r["check"] = row.label;
        r["expected"] = row.expected;
        r["actual"] = row.actual;
        r["tolerance"] = row.tolerance;
        r["pass"] = row.pass;
        rows.push_back(std::move(r));
    }
    doc["checks"] = std::move(rows);
    doc["all_pass"] = report.all_pass();
    return doc;
}

inline ojson plan_check_document(const PlanCheckReport& report) {
    ojson doc;
    doc["violations"] = report.violations;
    doc["recomputed_total_ebits"] = report.recomputed_total;
    doc["ok"] = report.ok();
    return doc;
}

} // namespace teleplan

#endif
