// teleplan: plan minimum-EPR-cost teleportation of multipartite pure states.
//
// Subcommands:
//   entropies  cut entropies of every nontrivial subset
//   plan       P1 / P2 / P3 / naive / route plans
//   validate   closed-form cross checks, or re-verification of a plan file
//   bounds     entanglement-of-formation bound reports
//
// Exit codes: 0 ok, 1 parse/usage error, 2 dimension cap, 3 numeric failure,
// 4 search budget exceeded, 5 validation failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "teleplan/teleplan.hpp"

namespace {

using namespace teleplan;

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonOpts {
    std::string state_file;
    std::string expr;
    std::vector<std::string> family;
    std::string format = "table";
    std::size_t max_dim = kDefaultMaxAmplitudes;
    int workers = 1;
};

void add_input_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--state", opts.state_file, "state file (DSL or amplitude format)");
    cmd->add_option("-e,--expr", opts.expr, "inline state expression");
    cmd->add_option("--family", opts.family,
                    "named family with arguments, e.g. --family ghz 4")
        ->expected(-1);
    cmd->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"table", "doc"}));
    cmd->add_option("--max-dim", opts.max_dim, "amplitude-count cap");
    cmd->add_option("--workers", opts.workers, "worker thread count")
        ->check(CLI::PositiveNumber);
}

long long parse_int_arg(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(what + " must be an integer (got '" + s + "')");
    }
}

double parse_real_arg(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(what + " must be a number (got '" + s + "')");
    }
}

StateTensor state_from_family(const std::vector<std::string>& args,
                              std::size_t max_dim) {
    if (args.empty()) throw std::invalid_argument("--family needs a name");
    const std::string& name = args[0];
    if (name == "ghz") {
        if (args.size() < 2 || args.size() > 3)
            throw std::invalid_argument("--family ghz N [k]");
        const int n = static_cast<int>(parse_int_arg(args[1], "N"));
        const int k = args.size() == 3
                          ? static_cast<int>(parse_int_arg(args[2], "k"))
                          : 2;
        return ghz(n, k, max_dim);
    }
    if (name == "toast") {
        if (args.size() != 2) throw std::invalid_argument("--family toast N");
        return toast(static_cast<int>(parse_int_arg(args[1], "N")), max_dim);
    }
    if (name == "etoast") {
        if (args.size() != 2) throw std::invalid_argument("--family etoast EPS");
        return epsilon_toast(parse_real_arg(args[1], "eps"));
    }
    if (name == "schmidt") {
        if (args.size() < 4)
            throw std::invalid_argument("--family schmidt N a0 a1 [...]");
        const int n = static_cast<int>(parse_int_arg(args[1], "N"));
        std::vector<double> coeffs;
        for (std::size_t i = 2; i < args.size(); ++i)
            coeffs.push_back(parse_real_arg(args[i], "coefficient"));
        return schmidt_state(n, coeffs, max_dim);
    }
    if (name == "fig1")
        return pair_graph_state(4, {{0, 1}, {1, 2}, {1, 2}, {2, 3}},
                                {.max_amplitudes = max_dim});
    throw std::invalid_argument("unknown family '" + name +
                                "' (ghz, toast, etoast, schmidt, fig1)");
}

StateTensor load_state(const CommonOpts& opts) {
    const int sources = int(!opts.state_file.empty()) + int(!opts.expr.empty()) +
                        int(!opts.family.empty());
    if (sources != 1)
        throw std::invalid_argument(
            "exactly one of --state, --expr, --family is required");
    if (!opts.family.empty()) return state_from_family(opts.family, opts.max_dim);
    const std::string text =
        !opts.expr.empty() ? opts.expr : read_file(opts.state_file);
    return parse_state_text(text);
}

std::string subset_names(const CutEntropyTable& table, std::uint32_t mask) {
    std::string out;
    for (int u = 0; u < table.units(); ++u)
        if ((mask >> u) & 1) {
            if (!out.empty()) out += ",";
            out += table.unit_names[u];
        }
    return out;
}

// ---------------------------------------------------------------- entropies

int cmd_entropies(const CommonOpts& opts, const std::string& granularity) {
    const StateTensor st = load_state(opts);
    const Granularity g =
        granularity == "cell" ? Granularity::Factor : Granularity::Party;
    const CutEntropyTable table = cut_entropy_table(st, g, opts.workers);
    if (opts.format == "doc") {
        ojson doc;
        doc["granularity"] = granularity;
        doc["state"] = render(st);
        doc["entropy_table"] = entropy_table_document(table);
        std::cout << doc.dump(2) << "\n";
        return 0;
    }
    for (std::uint32_t mask : detail::sorted_masks(table)) {
        if (mask == (1u << table.units()) - 1) continue; // trivial full cut
        std::cout << subset_names(table, mask) << "\t" << fmt9(table.at(mask))
                  << "\n";
    }
    return 0;
}

// --------------------------------------------------------------------- plan

struct PlanOpts {
    std::string protocol = "p1";
    std::string root;
    std::string embeddings_file;
    std::string prune = "on";
    double tol = 1e-9;
    int max_cells = 12;
};

int cmd_plan(const CommonOpts& opts, const PlanOpts& popts) {
    const StateTensor st = load_state(opts);
    SearchConfig config;
    config.tol = popts.tol;
    config.prune = popts.prune == "on";
    config.workers = opts.workers;
    config.max_cells = popts.max_cells;
    config.max_amplitudes = opts.max_dim;

    if (!popts.root.empty() && popts.protocol != "naive")
        throw std::invalid_argument("--root applies to the naive protocol only");

    PlanResult result;
    if (popts.protocol == "p1") {
        result = p1(st, config);
    } else if (popts.protocol == "p2") {
        result = p2(st, config);
    } else if (popts.protocol == "p3") {
        std::vector<IsometrySpec> embeddings;
        if (!popts.embeddings_file.empty())
            embeddings = read_embeddings_text(read_file(popts.embeddings_file), st);
        result = p3(st, embeddings, config);
    } else if (popts.protocol == "route") {
        result = route_search(st, party_cells(st), config);
    } else if (popts.protocol == "naive") {
        int root = 0;
        if (!popts.root.empty()) {
            root = st.party_index(popts.root);
            if (root < 0)
                throw std::invalid_argument("unknown party '" + popts.root + "'");
        } else {
            PlanResult best = naive_cost(st, 0, config);
            for (int r = 1; r < st.num_parties; ++r) {
                PlanResult cand = naive_cost(st, r, config);
                if (cand.plan.total_ebits < best.plan.total_ebits - config.tol) {
                    best = std::move(cand);
                    root = r;
                }
            }
        }
        result = naive_cost(st, root, config);
    } else {
        throw std::invalid_argument("unknown protocol '" + popts.protocol + "'");
    }

    // Naive baseline for comparison: best star plan over all roots.
    PlanResult baseline = naive_cost(st, 0, config);
    for (int r = 1; r < st.num_parties; ++r) {
        PlanResult cand = naive_cost(st, r, config);
        if (cand.plan.total_ebits < baseline.plan.total_ebits - config.tol)
            baseline = std::move(cand);
    }

    if (opts.format == "doc") {
        ojson doc = plan_document(result);
        ojson naive;
        naive["root"] = st.party_name(baseline.plan.root);
        naive["total_ebits"] = baseline.plan.total_ebits;
        doc["naive_baseline"] = std::move(naive);
        std::cout << doc.dump(2) << "\n";
        return 0;
    }
    const CellLayout& layout = result.layout;
    std::cout << "protocol: " << result.plan.protocol << "\n";
    std::cout << "root: "
              << (result.plan.root >= 0 ? layout.party_names[result.plan.root]
                                        : std::string("(preset)"))
              << "\n";
    for (std::size_t i = 0; i < result.plan.steps.size(); ++i) {
        const TeleportStep& step = result.plan.steps[i];
        std::string moved;
        for (int c : step.moved) {
            if (!moved.empty()) moved += ",";
            moved += layout.cells[c].name;
        }
        std::cout << "step " << i + 1 << ": {" << moved << "} "
                  << layout.party_names[step.source] << " -> "
                  << layout.party_names[step.dest] << "  cost "
                  << fmt9(step.cost_ebits) << "\n";
    }
    std::cout << "total_ebits: " << fmt9(result.plan.total_ebits) << "\n";
    std::cout << "naive_baseline(" << st.party_name(baseline.plan.root)
              << "): " << fmt9(baseline.plan.total_ebits) << "\n";
    return 0;
}

// ----------------------------------------------------------------- validate

std::pair<int, int> parse_range(const std::string& text) {
    const std::size_t dots = text.find("..");
    if (dots == std::string::npos) {
        const int n = static_cast<int>(parse_int_arg(text, "N"));
        return {n, n};
    }
    const int lo = static_cast<int>(parse_int_arg(text.substr(0, dots), "range start"));
    const int hi = static_cast<int>(parse_int_arg(text.substr(dots + 2), "range end"));
    if (hi < lo) throw std::invalid_argument("empty range '" + text + "'");
    return {lo, hi};
}

int cmd_validate(const CommonOpts& opts, const std::vector<std::string>& what) {
    if (what.empty())
        throw std::invalid_argument(
            "usage: validate <family> [range] | validate plan <file>");
    SearchConfig config;
    config.workers = opts.workers;
    config.max_amplitudes = opts.max_dim;

    if (what[0] == "plan") {
        if (what.size() != 2)
            throw std::invalid_argument("usage: validate plan <file>");
        const ojson doc = ojson::parse(read_file(what[1]), nullptr, true, true);
        const PlanResult loaded = plan_from_document(doc);
        const PlanCheckReport report =
            verify_plan(loaded.state, loaded.layout, loaded.plan);
        if (opts.format == "doc") {
            std::cout << plan_check_document(report).dump(2) << "\n";
        } else {
            for (const std::string& v : report.violations)
                std::cout << "violation: " << v << "\n";
            std::cout << (report.ok() ? "ok" : "invalid") << " (recomputed total "
                      << fmt9(report.recomputed_total) << ")\n";
        }
        return report.ok() ? 0 : 5;
    }

    int lo = 3, hi = 5;
    if (what.size() > 1) {
        const auto range = parse_range(what[1]);
        lo = range.first;
        hi = range.second;
    }
    const CrossValidationReport report = cross_validate(what[0], lo, hi, config);
    if (opts.format == "doc") {
        std::cout << cross_validation_document(report).dump(2) << "\n";
    } else {
        for (const CrossCheckRow& row : report.rows)
            std::cout << (row.pass ? "PASS" : "FAIL") << "  " << row.label
                      << "  expected " << fmt9(row.expected) << "  actual "
                      << fmt9(row.actual) << "\n";
        std::cout << (report.all_pass() ? "all checks passed" : "checks FAILED")
                  << "\n";
    }
    return report.all_pass() ? 0 : 5;
}

// ------------------------------------------------------------------- bounds

int cmd_bounds(const CommonOpts& opts, const std::vector<std::string>& family) {
    if (family.size() != 2)
        throw std::invalid_argument("usage: bounds --family {ghz|toast} N");
    const int n = static_cast<int>(parse_int_arg(family[1], "N"));
    if (n < 2) throw std::invalid_argument("N must be >= 2");

    if (family[0] == "ghz") {
        const EfBoundReport report = ef_bounds_ghz(n);
        if (opts.format == "doc") {
            ojson doc;
            doc["family"] = "ghz";
            doc["n"] = n;
            doc["lower_ebits"] = report.lower.value;
            doc["lower_open"] = report.lower.open;
            doc["upper_ebits"] = report.upper.value;
            doc["upper_open"] = report.upper.open;
            doc["degenerate"] = report.degenerate;
            doc["p1_ebits"] = p1_ghz(n);
            doc["provenance"] = report.provenance;
            std::cout << doc.dump(2) << "\n";
            return 0;
        }
        std::cout << "family: ghz  N: " << n << "\n";
        std::cout << fmt9(report.lower.value) << (report.lower.open ? " < " : " <= ")
                  << "E_F" << (report.upper.open ? " < " : " <= ")
                  << fmt9(report.upper.value) << "\n";
        std::cout << "endpoints: lower " << (report.lower.open ? "open" : "closed")
                  << ", upper " << (report.upper.open ? "open" : "closed")
                  << (report.degenerate ? " (degenerate)" : "") << "\n";
        std::cout << "P1 = " << fmt9(p1_ghz(n)) << "\n";
        std::cout << "provenance: " << report.provenance << "\n";
        return 0;
    }
    if (family[0] == "toast") {
        if (opts.format == "doc") {
            ojson doc;
            doc["family"] = "toast";
            doc["n"] = n;
            doc["ef_ebits"] = ef_toast(n);
            doc["p1_ebits"] = p1_toast(n);
            doc["p1_over_ef"] = toast_inefficiency(n);
            std::cout << doc.dump(2) << "\n";
            return 0;
        }
        std::cout << "family: toast  N: " << n << "\n";
        std::cout << "E_F = " << fmt9(ef_toast(n)) << "; P1 = " << fmt9(p1_toast(n))
                  << "\n";
        std::cout << "ratio P1/E_F = " << fmt9(toast_inefficiency(n)) << "\n";
        return 0;
    }
    throw std::invalid_argument("bounds supports families ghz and toast");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e)) return 1;
    if (dynamic_cast<const DimensionLimitError*>(&e)) return 2;
    if (dynamic_cast<const SearchBudgetError*>(&e)) return 4;
    if (dynamic_cast<const NumericError*>(&e)) return 3;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return 1;
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"teleportation-cost planning for multipartite pure states"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string granularity = "party";
    PlanOpts popts;
    std::vector<std::string> validate_args;
    std::vector<std::string> bounds_family;

    CLI::App* entropies = app.add_subcommand(
        "entropies", "cut entropies of every nontrivial subset");
    add_input_flags(entropies, opts);
    entropies->add_option("--granularity", granularity, "party or cell units")
        ->check(CLI::IsMember({"party", "cell"}));

    CLI::App* plan = app.add_subcommand("plan", "compute a teleportation plan");
    add_input_flags(plan, opts);
    plan->add_option("--protocol", popts.protocol, "p1, p2, p3, naive, or route")
        ->check(CLI::IsMember({"p1", "p2", "p3", "naive", "route"}));
    plan->add_option("--root", popts.root, "start party (naive only)");
    plan->add_option("--embeddings", popts.embeddings_file,
                     "isometry file for p3");
    plan->add_option("--prune", popts.prune, "owner-cell pruning")
        ->check(CLI::IsMember({"on", "off"}));
    plan->add_option("--tol", popts.tol, "plan comparison tolerance")
        ->check(CLI::PositiveNumber);
    plan->add_option("--max-cells", popts.max_cells, "route-search cell cap");

    CLI::App* validate = app.add_subcommand(
        "validate", "cross-check closed forms or re-verify a plan file");
    add_input_flags(validate, opts);
    validate->add_option("what", validate_args,
                         "<family> [range] or: plan <file>");

    CLI::App* bounds = app.add_subcommand(
        "bounds", "entanglement-of-formation bound report");
    bounds->add_option("--family", bounds_family, "family name and N")
        ->expected(-1);
    bounds->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"table", "doc"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (entropies->parsed()) return cmd_entropies(opts, granularity);
        if (plan->parsed()) return cmd_plan(opts, popts);
        if (validate->parsed()) return cmd_validate(opts, validate_args);
        if (bounds->parsed()) return cmd_bounds(opts, bounds_family);
        std::cerr << "no subcommand given\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
