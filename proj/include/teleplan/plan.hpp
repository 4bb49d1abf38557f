#ifndef TELEPLAN_PLAN_HPP
#define TELEPLAN_PLAN_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "teleplan/cells.hpp"
#include "teleplan/entropy.hpp"
#include "teleplan/errors.hpp"
#include "teleplan/isometry.hpp"
#include "teleplan/state.hpp"

namespace teleplan {

/// One teleportation: a set of cells compressed at `source` and sent to
/// `dest` for S(moved) ebits.
struct TeleportStep {
    std::vector<int> moved; // cell indices, ascending
    int source = 0;
    int dest = 0;
    double cost_ebits = 0.0;
};

/// A full delivery plan. Unless `start` is set, replay begins with every
/// cell at `root`.
struct TeleportPlan {
    std::string protocol; // "P1" | "P2" | "P3" | "naive" | "route"
    int root = 0;
    std::optional<std::vector<int>> start; // explicit initial cell locations
    std::vector<TeleportStep> steps;
    double total_ebits = 0.0;
};

/// Plan plus everything needed to interpret and re-verify it: the cell
/// layout, the entropy table the costs came from, and the tensor the layout
/// indexes (the embedded state for P3).
struct PlanResult {
    TeleportPlan plan;
    CellLayout layout;
    CutEntropyTable table;
    StateTensor state;
};

enum class TieBreak { FewestStepsThenLex };

struct SearchConfig {
    double tol = 1e-9;                  // plan-total comparison tolerance
    TieBreak tie_break = TieBreak::FewestStepsThenLex;
    bool prune = true;                  // never move a cell out of its owner
    int max_cells = 12;
    int max_parties = kDefaultMaxUnits;
    int workers = 1;
    std::uint64_t node_budget = 10'000'000;
    std::optional<std::vector<int>> start_locations; // route_search only
    std::size_t max_amplitudes = kDefaultMaxAmplitudes;
};

namespace detail {

inline constexpr double kTieEps = 1e-12;

inline std::string step_sort_key(const TeleportStep& s) {
    std::string key;
    for (int c : s.moved) key += std::to_string(c) + ",";
    key += "|" + std::to_string(s.source) + ">" + std::to_string(s.dest);
    return key;
}

inline std::string plan_sort_key(const TeleportPlan& p) {
    std::string key;
    for (const TeleportStep& s : p.steps) key += step_sort_key(s) + ";";
    return key;
}

/// Lexicographic plan comparison used for tie-breaking: total (within tol),
/// then step count, then serialized steps.
inline bool plan_less(const TeleportPlan& a, const TeleportPlan& b, double tol) {
    if (a.total_ebits < b.total_ebits - tol) return true;
    if (b.total_ebits < a.total_ebits - tol) return false;
    if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
    return plan_sort_key(a) < plan_sort_key(b);
}

inline std::vector<int> mask_to_cells(std::uint32_t mask) {
    std::vector<int> cells;
    for (int c = 0; mask; ++c, mask >>= 1)
        if (mask & 1) cells.push_back(c);
    return cells;
}

/// Rooted-tree cost table over party subsets.
///
///   splitv[W] = min cost of delivering W as a forest of subtrees hanging
///               off an already-placed node; the subtree containing W's
///               lowest-index party is chosen first.
///   gv[V]     = min over v in V of splitv[V \ {v}]  (v = subtree root)
///
/// Edge cost of a subtree V is S(V); a tree's total is the sum over its
/// non-root vertices of S(subtree(v)).
struct P1Tables {
    std::vector<double> splitv, gv;
};

inline P1Tables p1_tables(const CutEntropyTable& table, int n) {
    const std::uint32_t size = 1u << n;
    P1Tables t;
    t.splitv.assign(size, 0.0);
    t.gv.assign(size, 0.0);
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::uint32_t w = 1; w < size; ++w) {
        // g(W): pick the landing vertex.
        double best = inf;
        for (int v = 0; v < n; ++v)
            if ((w >> v) & 1) best = std::min(best, t.splitv[w & ~(1u << v)]);
        t.gv[w] = best;
        // split(W): pick the subtree containing the lowest party, recurse.
        const std::uint32_t low = w & (~w + 1);
        const std::uint32_t rest = w & ~low;
        best = inf;
        for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
            const std::uint32_t v = sub | low;
            best = std::min(best, table.at(v) + t.gv[v] + t.splitv[w & ~v]);
            if (sub == 0) break;
        }
        t.splitv[w] = best;
    }
    return t;
}

/// Reconstruct the delivery steps for pending set `w` hanging off party `at`,
/// following the first within-tolerance choice in the same enumeration order
/// as p1_tables (deterministic output).
inline void p1_reconstruct(const P1Tables& t, const CutEntropyTable& table,
                           int n, int at, std::uint32_t w,
                           std::vector<TeleportStep>& out) {
    if (w == 0) return;
    const std::uint32_t low = w & (~w + 1);
    const std::uint32_t rest = w & ~low;
    for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
        const std::uint32_t v = sub | low;
        const double cand = table.at(v) + t.gv[v] + t.splitv[w & ~v];
        if (cand <= t.splitv[w] + kTieEps) {
            int land = -1;
            for (int cand_v = 0; cand_v < n; ++cand_v)
                if ((v >> cand_v) & 1 &&
                    t.splitv[v & ~(1u << cand_v)] <= t.gv[v] + kTieEps) {
                    land = cand_v;
                    break;
                }
            TeleportStep step;
            step.moved = mask_to_cells(v);
            step.source = at;
            step.dest = land;
            step.cost_ebits = table.at(v);
            out.push_back(std::move(step));
            p1_reconstruct(t, table, n, land, v & ~(1u << land), out);
            p1_reconstruct(t, table, n, at, w & ~v, out);
            return;
        }
        if (sub == 0) break;
    }
    throw NumericError("plan reconstruction failed"); // unreachable
}

} // namespace detail

/// Minimum-cost series of N-1 teleportations distributing the state from a
/// single start party, exact over all rooted delivery trees (subset DP).
inline PlanResult p1(const StateTensor& st, const SearchConfig& config = {}) {
    const int n = st.num_parties;
    if (n > config.max_parties)
        throw DimensionLimitError("party count " + std::to_string(n) +
                                  " over the limit of " +
                                  std::to_string(config.max_parties));
    PlanResult result;
    result.layout = party_cells(st);
    result.table = cut_entropy_table(st, Granularity::Party, config.workers,
                                     config.max_parties);
    result.state = st;

    const auto tables = detail::p1_tables(result.table, n);
    const std::uint32_t full = (1u << n) - 1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < n; ++r)
        best = std::min(best, tables.splitv[full & ~(1u << r)]);

    // Reconstruct a plan for every optimal root and keep the tie-break
    // minimum (fewest steps, then lexicographically smallest serialization).
    std::optional<TeleportPlan> chosen;
    for (int r = 0; r < n; ++r) {
        if (tables.splitv[full & ~(1u << r)] > best + config.tol) continue;
        TeleportPlan plan;
        plan.protocol = "P1";
        plan.root = r;
        detail::p1_reconstruct(tables, result.table, n, r, full & ~(1u << r),
                               plan.steps);
        plan.total_ebits = 0.0;
        for (const TeleportStep& s : plan.steps) plan.total_ebits += s.cost_ebits;
        if (!chosen || detail::plan_less(plan, *chosen, config.tol))
            chosen = std::move(plan);
    }
    result.plan = std::move(*chosen);
    return result;
}

/// Independent oracle for p1: literal enumeration of every rooted labeled
/// tree on the parties via exhaustive parent assignment.
inline PlanResult p1_oracle(const StateTensor& st, const SearchConfig& config = {}) {
    const int n = st.num_parties;
    if (n > 7)
        throw DimensionLimitError("p1_oracle limited to 7 parties");
    PlanResult result;
    result.layout = party_cells(st);
    result.table = cut_entropy_table(st, Granularity::Party, config.workers);
    result.state = st;
    const CutEntropyTable& table = result.table;

    TeleportPlan best;
    best.total_ebits = std::numeric_limits<double>::infinity();
    std::vector<int> verts, parent(n, -1);

    auto tree_plan = [&](int root) {
        // Pre-order emission: parents before children, children ascending.
        std::vector<std::uint32_t> subtree(n, 0);
        for (int v : verts) {
            int u = v;
            while (u != root) {
                subtree[u] |= 1u << v;
                u = parent[u];
            }
        }
        TeleportPlan plan;
        plan.protocol = "P1";
        plan.root = root;
        std::vector<int> order{root};
        for (std::size_t i = 0; i < order.size(); ++i)
            for (int v = 0; v < n; ++v)
                if (v != root && parent[v] == order[i]) {
                    TeleportStep step;
                    step.moved = detail::mask_to_cells(subtree[v]);
                    step.source = order[i];
                    step.dest = v;
                    step.cost_ebits = table.at(subtree[v]);
                    plan.steps.push_back(std::move(step));
                    order.push_back(v);
                }
        for (const TeleportStep& s : plan.steps) plan.total_ebits += s.cost_ebits;
        return plan;
    };

    for (int root = 0; root < n; ++root) {
        verts.clear();
        for (int v = 0; v < n; ++v)
            if (v != root) verts.push_back(v);
        const int m = static_cast<int>(verts.size());
        std::vector<int> choice(m, 0); // parent candidate index per vertex
        while (true) {
            bool valid = true;
            // choice i indexes the candidate parents of verts[i]: every party
            // except verts[i] itself.
            for (int i = 0; i < m; ++i)
                parent[verts[i]] = choice[i] < verts[i] ? choice[i] : choice[i] + 1;
            // Reject assignments with cycles (walk to root within n hops).
            for (int v : verts) {
                int u = v, hops = 0;
                while (u != root && hops++ <= n) u = parent[u];
                if (u != root) {
                    valid = false;
                    break;
                }
            }
            if (valid) {
                double total = 0.0;
                std::vector<std::uint32_t> subtree(n, 0);
                for (int v : verts) {
                    int u = v;
                    while (u != root) {
                        subtree[u] |= 1u << v;
                        u = parent[u];
                    }
                }
                for (int v : verts) subtree[v] |= 1u << v;
                for (int v : verts) total += table.at(subtree[v]);
                if (total < best.total_ebits - detail::kTieEps) {
                    best = tree_plan(root);
                } else if (total <= best.total_ebits + detail::kTieEps) {
                    TeleportPlan cand = tree_plan(root);
                    if (detail::plan_less(cand, best, detail::kTieEps))
                        best = std::move(cand);
                }
            }
            int i = m - 1;
            while (i >= 0 && choice[i] == n - 2) choice[i--] = 0;
            if (i < 0) break;
            ++choice[i];
        }
    }
    result.plan = std::move(best);
    return result;
}

/// Star baseline: teleport every other party's subsystem directly from
/// `root`, at sum of single-party entropies.
inline PlanResult naive_cost(const StateTensor& st, int root,
                             const SearchConfig& config = {}) {
    const int n = st.num_parties;
    if (root < 0 || root >= n) throw std::invalid_argument("invalid root party");
    PlanResult result;
    result.layout = party_cells(st);
    result.table = cut_entropy_table(st, Granularity::Party, config.workers,
                                     config.max_parties);
    result.state = st;
    TeleportPlan plan;
    plan.protocol = "naive";
    plan.root = root;
    for (int v = 0; v < n; ++v) {
        if (v == root) continue;
        TeleportStep step;
        step.moved = {v};
        step.source = root;
        step.dest = v;
        step.cost_ebits = result.table.at(1u << v);
        plan.total_ebits += step.cost_ebits;
        plan.steps.push_back(std::move(step));
    }
    result.plan = std::move(plan);
    return result;
}

namespace detail {

/// Configurations are packed 4 bits per cell (party count <= 16).
inline std::uint64_t pack_locations(const std::vector<int>& loc) {
    std::uint64_t key = 0;
    for (std::size_t c = 0; c < loc.size(); ++c)
        key |= static_cast<std::uint64_t>(loc[c] & 0xf) << (4 * c);
    return key;
}

struct RouteNode {
    double cost = std::numeric_limits<double>::infinity();
    int steps = std::numeric_limits<int>::max();
    std::uint64_t parent = 0;
    std::uint32_t moved = 0;
    std::uint8_t source = 0, dest = 0;
    bool closed = false;
    bool has_parent = false;
};

struct RouteOutcome {
    bool reached = false;
    TeleportPlan plan;
};

/// Uniform-cost search over cell configurations. Costs depend only on the
/// moved set, so edges are location-independent; tie-breaking on (cost,
/// steps) keeps plans free of zero-cost shuffling.
inline RouteOutcome route_dijkstra(const CellLayout& layout,
                                   const CutEntropyTable& table,
                                   const std::vector<int>& start,
                                   const SearchConfig& config,
                                   std::uint64_t& expanded_budget) {
    const int num_cells = layout.num_cells();
    const int n = layout.num_parties;
    std::vector<int> goal(num_cells);
    for (int c = 0; c < num_cells; ++c) goal[c] = layout.cells[c].owner;
    const std::uint64_t goal_key = pack_locations(goal);
    const std::uint64_t start_key = pack_locations(start);

    std::unordered_map<std::uint64_t, RouteNode> nodes;
    using QueueItem = std::tuple<double, int, std::uint64_t>; // cost, steps, key
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue;
    nodes[start_key] = RouteNode{0.0, 0, 0, 0, 0, 0, false, false};
    queue.emplace(0.0, 0, start_key);

    while (!queue.empty()) {
        const auto [cost, steps, key] = queue.top();
        queue.pop();
        RouteNode& node = nodes[key];
        if (node.closed) continue;
        if (cost > node.cost + kTieEps ||
            (cost > node.cost - kTieEps && steps > node.steps))
            continue; // stale entry
        node.closed = true;
        if (key == goal_key) {
            RouteOutcome out;
            out.reached = true;
            out.plan.total_ebits = node.cost;
            std::uint64_t cur = key;
            while (true) {
                const RouteNode& cn = nodes[cur];
                if (!cn.has_parent) break;
                TeleportStep step;
                step.moved = mask_to_cells(cn.moved);
                step.source = cn.source;
                step.dest = cn.dest;
                step.cost_ebits = table.at(cn.moved);
                out.plan.steps.push_back(std::move(step));
                cur = cn.parent;
            }
            std::reverse(out.plan.steps.begin(), out.plan.steps.end());
            return out;
        }
        if (expanded_budget-- == 0)
            throw SearchBudgetError("route search exceeded the node budget");

        std::vector<std::uint32_t> at(n, 0);
        for (int c = 0; c < num_cells; ++c)
            at[(key >> (4 * c)) & 0xf] |= 1u << c;
        for (int src = 0; src < n; ++src) {
            std::uint32_t movable = at[src];
            if (config.prune) {
                for (int c = 0; c < num_cells; ++c)
                    if (layout.cells[c].owner == src) movable &= ~(1u << c);
            }
            if (!movable) continue;
            // Nonempty submasks of movable in increasing numeric order.
            for (std::uint32_t moved = (0u - movable) & movable; moved;
                 moved = (moved - movable) & movable) {
                const double edge = table.at(moved);
                for (int dst = 0; dst < n; ++dst) {
                    if (dst == src) continue;
                    std::uint64_t next = key;
                    for (int c = 0; c < num_cells; ++c)
                        if ((moved >> c) & 1) {
                            next &= ~(std::uint64_t(0xf) << (4 * c));
                            next |= static_cast<std::uint64_t>(dst) << (4 * c);
                        }
                    const double ncost = cost + edge;
                    const int nsteps = steps + 1;
                    auto [it, fresh] = nodes.try_emplace(next);
                    RouteNode& cand = it->second;
                    const bool better =
                        fresh || ncost < cand.cost - kTieEps ||
                        (ncost <= cand.cost + kTieEps && nsteps < cand.steps);
                    if (better && !cand.closed) {
                        cand.cost = ncost;
                        cand.steps = nsteps;
                        cand.parent = key;
                        cand.moved = moved;
                        cand.source = static_cast<std::uint8_t>(src);
                        cand.dest = static_cast<std::uint8_t>(dst);
                        cand.has_parent = true;
                        queue.emplace(ncost, nsteps, next);
                    }
                }
            }
        }
    }
    return {};
}

} // namespace detail

/// Exact minimum-cost routing of layout cells to their owners. Without an
/// explicit start configuration, every cell begins at a single root party and
/// the result is minimized over roots.
inline PlanResult route_search(const StateTensor& st, const CellLayout& layout,
                               const SearchConfig& config = {}) {
    const int num_cells = layout.num_cells();
    if (num_cells > config.max_cells)
        throw DimensionLimitError("cell count " + std::to_string(num_cells) +
                                  " over the limit of " +
                                  std::to_string(config.max_cells));
    if (num_cells > 15) // configurations are packed 4 bits per cell
        throw DimensionLimitError("route search supports at most 15 cells");
    const int n = layout.num_parties;
    if (n > 16)
        throw DimensionLimitError("route search limited to 16 parties");

    PlanResult result;
    result.state = refined_state(st, layout);
    result.layout = layout;
    std::vector<std::vector<int>> groups;
    std::vector<std::string> names;
    for (const Cell& cell : layout.cells) {
        groups.push_back(cell.factors);
        names.push_back(cell.name);
    }
    result.table = cut_entropy_table_for_units(result.state, std::move(groups),
                                               std::move(names), config.workers,
                                               config.max_cells);

    if (config.start_locations) {
        const std::vector<int>& start = *config.start_locations;
        if (static_cast<int>(start.size()) != num_cells)
            throw std::invalid_argument("start_locations length mismatch");
        for (int p : start)
            if (p < 0 || p >= n) throw std::invalid_argument("start location out of range");
        std::uint64_t budget = config.node_budget;
        auto outcome = detail::route_dijkstra(layout, result.table, start,
                                              config, budget);
        if (!outcome.reached) throw NumericError("route search found no plan");
        outcome.plan.protocol = "route";
        outcome.plan.root = -1;
        outcome.plan.start = start;
        result.plan = std::move(outcome.plan);
        return result;
    }

    // One search per root; parallel roots see private budgets but identical
    // per-root results, so the combined outcome matches sequential execution.
    std::vector<std::optional<TeleportPlan>> per_root(n);
    std::vector<std::exception_ptr> errors(n);
    auto run_root = [&](int r) {
        try {
            std::vector<int> start(num_cells, r);
            std::uint64_t budget = config.node_budget;
            auto outcome = detail::route_dijkstra(layout, result.table, start,
                                                  config, budget);
            if (outcome.reached) {
                outcome.plan.protocol = "route";
                outcome.plan.root = r;
                per_root[r] = std::move(outcome.plan);
            }
        } catch (...) {
            errors[r] = std::current_exception();
        }
    };
    const int workers = std::max(1, std::min(config.workers, n));
    if (workers == 1) {
        for (int r = 0; r < n; ++r) run_root(r);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (int r = t; r < n; r += workers) run_root(r);
            });
        for (std::thread& th : pool) th.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    int best = -1;
    for (int r = 0; r < n; ++r) {
        if (!per_root[r]) continue;
        if (best < 0 || detail::plan_less(*per_root[r], *per_root[best], config.tol))
            best = r;
    }
    if (best < 0) throw NumericError("route search found no plan");
    result.plan = std::move(*per_root[best]);
    return result;
}

/// Protocol P2: route search over prime-dimensional cells.
inline PlanResult p2(const StateTensor& st, const SearchConfig& config = {}) {
    PlanResult result = route_search(st, prime_split(st), config);
    result.plan.protocol = "P2";
    return result;
}

/// Protocol P3: apply one local isometry per party (identity when absent),
/// then run P2 on the extended state. Only the supplied ancilla choice is
/// evaluated.
inline PlanResult p3(const StateTensor& st,
                     const std::vector<IsometrySpec>& embeddings,
                     const SearchConfig& config = {}) {
    std::vector<const IsometrySpec*> per_party(st.num_parties, nullptr);
    for (const IsometrySpec& spec : embeddings) {
        if (spec.party < 0 || spec.party >= st.num_parties)
            throw std::invalid_argument("embedding party out of range");
        if (per_party[spec.party])
            throw std::invalid_argument("duplicate embedding for party " +
                                        st.party_name(spec.party));
        per_party[spec.party] = &spec;
    }
    StateTensor extended = st;
    for (int p = 0; p < st.num_parties; ++p)
        if (per_party[p])
            extended = apply_isometry(extended, *per_party[p], config.max_amplitudes);
    PlanResult result = route_search(extended, prime_split(extended), config);
    result.plan.protocol = "P3";
    return result;
}

/// Replay report: empty `violations` means the plan is internally consistent
/// and delivers every cell to its owner at the stated costs.
struct PlanCheckReport {
    std::vector<std::string> violations;
    double recomputed_total = 0.0;
    bool ok() const { return violations.empty(); }
};

/// Replays a plan against an independently recomputed entropy per step.
inline PlanCheckReport verify_plan(const StateTensor& st, const CellLayout& layout,
                                   const TeleportPlan& plan) {
    PlanCheckReport report;
    auto fail = [&report](const std::string& msg) { report.violations.push_back(msg); };

    StateTensor rstate;
    try {
        rstate = refined_state(st, layout);
    } catch (const std::exception& e) {
        fail(std::string("layout mismatch: ") + e.what());
        return report;
    }
    const int num_cells = layout.num_cells();
    const int n = layout.num_parties;
    std::vector<int> loc(num_cells);
    if (plan.start) {
        if (static_cast<int>(plan.start->size()) != num_cells) {
            fail("start configuration length mismatch");
            return report;
        }
        loc = *plan.start;
    } else {
        if (plan.root < 0 || plan.root >= n) {
            fail("root party out of range");
            return report;
        }
        std::fill(loc.begin(), loc.end(), plan.root);
    }

    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const TeleportStep& step = plan.steps[i];
        const std::string tag = "step " + std::to_string(i + 1) + ": ";
        if (step.moved.empty()) {
            fail(tag + "empty moved set");
            continue;
        }
        if (step.source == step.dest) fail(tag + "source equals destination");
        if (step.source < 0 || step.source >= n || step.dest < 0 || step.dest >= n) {
            fail(tag + "party out of range");
            continue;
        }
        std::vector<int> factors;
        bool placed = true;
        for (int c : step.moved) {
            if (c < 0 || c >= num_cells) {
                fail(tag + "cell index out of range");
                placed = false;
                break;
            }
            if (loc[c] != step.source) {
                fail(tag + "cell " + layout.cells[c].name + " not at source " +
                     layout.party_names[step.source]);
                placed = false;
            }
            factors.insert(factors.end(), layout.cells[c].factors.begin(),
                           layout.cells[c].factors.end());
        }
        if (!placed) continue;
        const double recomputed = cut_entropy(rstate, factors);
        report.recomputed_total += recomputed;
        if (std::abs(recomputed - step.cost_ebits) > 1e-12)
            fail(tag + "cost mismatch: stated " + std::to_string(step.cost_ebits) +
                 ", recomputed " + std::to_string(recomputed));
        for (int c : step.moved) loc[c] = step.dest;
    }
    for (int c = 0; c < num_cells; ++c)
        if (loc[c] != layout.cells[c].owner)
            fail("cell " + layout.cells[c].name + " not delivered to its owner");
    if (std::abs(report.recomputed_total - plan.total_ebits) > 1e-9)
        fail("total mismatch: stated " + std::to_string(plan.total_ebits) +
             ", recomputed " + std::to_string(report.recomputed_total));
    if (plan.protocol == "P1") {
        if (plan.steps.size() + 1 != static_cast<std::size_t>(n))
            fail("P1 plan must have exactly N-1 steps");
        for (std::size_t i = 0; i < plan.steps.size(); ++i) {
            bool owns = false;
            for (int c : plan.steps[i].moved)
                if (layout.cells[c].owner == plan.steps[i].dest) owns = true;
            if (!owns)
                fail("step " + std::to_string(i + 1) +
                     ": destination owns no moved cell");
        }
    }
    return report;
}

} // namespace teleplan

#endif
