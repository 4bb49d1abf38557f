// Acceptance suite: one line per criterion, exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "helpers.hpp"
#include "teleplan/teleplan.hpp"

#ifndef TELEPLAN_CLI_PATH
#error "TELEPLAN_CLI_PATH must point at the built binary"
#endif

using namespace teleplan;

namespace {

int failures = 0;

struct Checker {
    bool ok = true;
    double max_dev = 0.0;
    std::string detail;

    void within(double actual, double expected, double tol,
                const std::string& what) {
        const double dev = std::abs(actual - expected);
        max_dev = std::max(max_dev, dev);
        if (dev > tol) {
            ok = false;
            if (detail.empty())
                detail = what + ": got " + std::to_string(actual) + ", want " +
                         std::to_string(expected) + " (tol " +
                         std::to_string(tol) + ")";
        }
    }
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (detail.empty()) detail = what;
        }
    }
};

void criterion(int id, const std::string& label,
               const std::function<void(Checker&)>& body) {
    Checker check;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.ok = false;
        check.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    char line[512];
    std::snprintf(line, sizeof(line), "[%s] criterion %2d: %s (max dev %.2e, %.2fs)%s%s",
                  check.ok ? "PASS" : "FAIL", id, label.c_str(), check.max_dev,
                  secs, check.detail.empty() ? "" : " -- ",
                  check.detail.c_str());
    std::cout << line << "\n";
    if (!check.ok) ++failures;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

int cli_counter = 0;

RunResult run_cli(const std::string& args) {
    const std::string base = "/tmp/teleplan_acc_" + std::to_string(::getpid()) +
                             "_" + std::to_string(cli_counter++);
    const std::string cmd = std::string(TELEPLAN_CLI_PATH) + " " + args + " >" +
                            base + ".out 2>" + base + ".err";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    for (const char* suffix : {".out", ".err"}) {
        std::ifstream in(base + suffix, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        (suffix[1] == 'o' ? r.out : r.err) = ss.str();
        std::remove((base + suffix).c_str());
    }
    return r;
}

StateTensor random_23_state(int parties, std::uint64_t seed) {
    std::mt19937_64 gen(seed * 2654435761ull + 17);
    std::vector<int> dims(parties), owner(parties);
    for (int p = 0; p < parties; ++p) {
        dims[p] = 2 + static_cast<int>(gen() % 2);
        owner[p] = p;
    }
    return random_state(dims, owner, seed);
}

StateTensor random_six_qubit_cells(std::uint64_t seed) {
    return random_state({2, 2, 2, 2, 2, 2}, {0, 0, 1, 1, 2, 2}, seed);
}

Eigen::MatrixXcd random_unitary(int dim, std::uint64_t seed) {
    std::mt19937_64 gen(seed ^ 0xabcdef1234ull);
    auto uniform = [&gen]() { return (double(gen() >> 11) + 0.5) * 0x1.0p-53; };
    Eigen::MatrixXcd m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            const double r = std::sqrt(-2.0 * std::log(uniform()));
            const double phi = 2.0 * 3.14159265358979323846 * uniform();
            m(i, j) = cplx(r * std::cos(phi), r * std::sin(phi));
        }
    return Eigen::HouseholderQR<Eigen::MatrixXcd>(m).householderQ();
}

std::vector<double> single_party_entropies(const CutEntropyTable& table, int n) {
    std::vector<double> singles;
    for (int p = 0; p < n; ++p) singles.push_back(table.at(1u << p));
    std::sort(singles.begin(), singles.end());
    return singles;
}

} // namespace

int main() {
    criterion(1, "cat-state regression: p1(ghz(N,2)) = N-1, N = 3..8, under 10 s",
              [](Checker& check) {
                  const auto start = std::chrono::steady_clock::now();
                  for (int n = 3; n <= 8; ++n)
                      check.within(p1(ghz(n, 2)).plan.total_ebits, double(n - 1),
                                   1e-9, "p1(ghz(" + std::to_string(n) + "))");
                  const double secs = std::chrono::duration<double>(
                                          std::chrono::steady_clock::now() - start)
                                          .count();
                  check.require(secs < 10.0, "runtime exceeded 10 s");
              });

    criterion(2, "toast regression: p1 = (N-1)^2 and cut entropies M(N-M), N = 3..5",
              [](Checker& check) {
                  for (int n = 3; n <= 5; ++n) {
                      const StateTensor st = toast(n);
                      check.within(p1(st).plan.total_ebits,
                                   double((n - 1) * (n - 1)), 1e-9,
                                   "p1(toast(" + std::to_string(n) + "))");
                      const CutEntropyTable table =
                          cut_entropy_table(st, Granularity::Party, 2);
                      for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
                          const int m = __builtin_popcount(mask);
                          check.within(table.at(mask), double(m * (n - m)), 1e-9,
                                       "toast cut entropy");
                      }
                  }
              });

    criterion(3, "4-party fixture: p1 = 4, naive from C = 5, cost-2 {A,B} step",
              [](Checker& check) {
                  const StateTensor fig1 =
                      pair_graph_state(4, {{0, 1}, {1, 2}, {1, 2}, {2, 3}});
                  const PlanResult result = p1(fig1);
                  check.within(result.plan.total_ebits, 4.0, 1e-9, "p1 total");
                  check.within(naive_cost(fig1, 2).plan.total_ebits, 5.0, 1e-9,
                               "naive from C");
                  bool found = false;
                  for (const TeleportStep& step : result.plan.steps)
                      if (step.moved == std::vector<int>{0, 1} &&
                          std::abs(step.cost_ebits - 2.0) <= 1e-9)
                          found = true;
                  check.require(found, "no cost-2 step moving the {A,B} bundle");
                  check.require(
                      verify_plan(result.state, result.layout, result.plan).ok(),
                      "plan failed verification");
              });

    criterion(4, "tripartite closed form: p1 = S1+S2 on 100 random 3-party states",
              [](Checker& check) {
                  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
                      const StateTensor st = random_23_state(3, seed);
                      const PlanResult result = p1(st);
                      const auto singles = single_party_entropies(result.table, 3);
                      check.within(result.plan.total_ebits,
                                   singles[0] + singles[1], 1e-9,
                                   "seed " + std::to_string(seed));
                  }
              });

    criterion(5, "Schmidt states: p1 = (N-1) S for N = 3..6, 10 vectors each",
              [](Checker& check) {
                  std::mt19937_64 gen(404);
                  for (int n = 3; n <= 6; ++n)
                      for (int trial = 0; trial < 10; ++trial) {
                          const int k = 2 + static_cast<int>(gen() % 2);
                          std::vector<double> weights(k);
                          double sum = 0.0;
                          for (double& w : weights) {
                              w = 0.05 + double(gen() % 1000) / 1000.0;
                              sum += w;
                          }
                          std::vector<double> coeffs(k);
                          for (int i = 0; i < k; ++i)
                              coeffs[i] = std::sqrt(weights[i] / sum);
                          const StateTensor st = schmidt_state(n, coeffs);
                          const double s = cut_entropy(st, st.party_factors(0));
                          check.within(p1(st).plan.total_ebits, double(n - 1) * s,
                                       1e-9,
                                       "N=" + std::to_string(n) + " trial " +
                                           std::to_string(trial));
                      }
              });

    criterion(6, "P2 on 3-toast: total 3 in exactly three 1-ebit verified steps",
              [](Checker& check) {
                  const PlanResult result = p2(toast(3));
                  check.within(result.plan.total_ebits, 3.0, 1e-9, "p2 total");
                  check.require(result.plan.steps.size() == 3,
                                "expected exactly 3 steps");
                  for (const TeleportStep& step : result.plan.steps)
                      check.within(step.cost_ebits, 1.0, 1e-9, "step cost");
                  check.require(
                      verify_plan(result.state, result.layout, result.plan).ok(),
                      "plan failed verification");
              });

    criterion(7, "P3 on the 5x5x5 state: exactly 3 at eps = 0, near 3 at eps = 1e-3",
              [](Checker& check) {
                  const std::vector<IsometrySpec> embeddings{
                      epsilon_toast_embedding(0), epsilon_toast_embedding(1),
                      epsilon_toast_embedding(2)};
                  const PlanResult exact = p3(epsilon_toast(0.0), embeddings);
                  check.within(exact.plan.total_ebits, 3.0, 1e-9, "p3 at eps=0");
                  check.require(
                      verify_plan(exact.state, exact.layout, exact.plan).ok(),
                      "eps=0 plan failed verification");

                  // Upper bound from the explicit three-step route, costed with
                  // the entropy core on the embedded state (factors 0..8
                  // party-major; C's qubits are 6,7,8).
                  StateTensor embedded = epsilon_toast(1e-3);
                  for (int p = 0; p < 3; ++p)
                      embedded = apply_isometry(embedded, embeddings[p]);
                  const double route_cost = cut_entropy(embedded, {6}) +
                                            cut_entropy(embedded, {3, 4, 5, 7, 8}) +
                                            cut_entropy(embedded, {7, 8});
                  const PlanResult perturbed = p3(epsilon_toast(1e-3), embeddings);
                  check.within(perturbed.plan.total_ebits, 3.0, 0.05,
                               "p3 at eps=1e-3");
                  check.require(perturbed.plan.total_ebits <= route_cost + 1e-9,
                                "p3 exceeded the explicit route cost");
                  check.require(
                      verify_plan(perturbed.state, perturbed.layout, perturbed.plan)
                          .ok(),
                      "eps=1e-3 plan failed verification");
              });

    criterion(8, "oracle equivalence: DP vs tree enumeration, 50 states each N = 4,5,6",
              [](Checker& check) {
                  for (int n = 4; n <= 6; ++n)
                      for (std::uint64_t seed = 1; seed <= 50; ++seed) {
                          const StateTensor st = testutil::random_qubit_state(
                              n, seed + 1000 * n);
                          check.within(p1(st).plan.total_ebits,
                                       p1_oracle(st).plan.total_ebits, 1e-9,
                                       "N=" + std::to_string(n) + " seed " +
                                           std::to_string(seed));
                      }
              });

    criterion(9, "property suite: 100+ randomized instances per property",
              [](Checker& check) {
                  std::mt19937_64 gen(905);
                  // Purity complement, sub-additivity, triangle inequality.
                  for (int trial = 0; trial < 100; ++trial) {
                      const StateTensor st =
                          testutil::random_small_state(trial + 3000);
                      std::vector<int> a, b;
                      for (int f = 0; f < st.num_factors(); ++f) {
                          const auto roll = gen() % 3;
                          if (roll == 0) a.push_back(f);
                          if (roll == 1) b.push_back(f);
                      }
                      if (a.empty() || b.empty()) {
                          a.assign(1, 0);
                          b.assign(1, st.num_factors() - 1);
                          if (b[0] == a[0]) b[0] = 1;
                      }
                      std::vector<int> ab = a, comp;
                      ab.insert(ab.end(), b.begin(), b.end());
                      for (int f = 0; f < st.num_factors(); ++f)
                          if (std::find(ab.begin(), ab.end(), f) == ab.end())
                              comp.push_back(f);
                      const double sa = cut_entropy(st, a);
                      const double sb = cut_entropy(st, b);
                      const double sab = cut_entropy(st, ab);
                      if (!comp.empty())
                          check.within(sab, cut_entropy(st, comp), 1e-9,
                                       "purity complement");
                      check.require(sa + sb >= sab - 1e-9, "sub-additivity");
                      check.require(sab >= std::abs(sa - sb) - 1e-9,
                                    "triangle inequality");
                  }
                  // Local isometry invariance.
                  for (int trial = 0; trial < 100; ++trial) {
                      const StateTensor st =
                          testutil::random_small_state(trial + 4000);
                      IsometrySpec spec = identity_embedding(st, trial % st.num_parties);
                      spec.columns = random_unitary(spec.input_dim, trial + 1);
                      const StateTensor rotated = apply_isometry(st, spec);
                      const CutEntropyTable before =
                          cut_entropy_table(st, Granularity::Party);
                      const CutEntropyTable after =
                          cut_entropy_table(rotated, Granularity::Party);
                      for (std::size_t mask = 0; mask < before.ebits.size(); ++mask)
                          check.within(after.ebits[mask], before.ebits[mask], 1e-9,
                                       "isometry invariance");
                  }
                  // p2 <= p1 and pruned == unpruned routing.
                  SearchConfig pruned, open;
                  pruned.prune = true;
                  open.prune = false;
                  for (int trial = 0; trial < 100; ++trial) {
                      const StateTensor st = random_six_qubit_cells(trial + 5000);
                      const double tree = p1(st).plan.total_ebits;
                      const double routed = p2(st, pruned).plan.total_ebits;
                      check.require(routed <= tree + 1e-9, "p2 <= p1");
                      check.within(routed,
                                   p2(st, open).plan.total_ebits, 1e-9,
                                   "pruned vs unpruned");
                  }
              });

    criterion(10, "bound reports: ghz(3) interval and toast(4) ratio",
              [](Checker& check) {
                  const EfBoundReport report = ef_bounds_ghz(3);
                  check.within(report.lower.value, 1.5, 1e-12, "lower bound");
                  check.require(report.lower.open, "lower endpoint must be open");
                  check.within(report.upper.value, 2.0, 1e-12, "upper bound");
                  check.require(!report.upper.open, "upper endpoint must be closed");

                  const RunResult ghz3 = run_cli("bounds --family ghz 3");
                  check.require(ghz3.exit_code == 0, "bounds ghz exit code");
                  check.require(ghz3.out.find("1.500000000 < E_F <= 2.000000000") !=
                                    std::string::npos,
                                "ghz(3) bound line missing");
                  check.require(ghz3.out.find("lower open") != std::string::npos,
                                "open/closed annotation missing");

                  const RunResult toast4 = run_cli("bounds --family toast 4");
                  check.require(toast4.exit_code == 0, "bounds toast exit code");
                  check.require(
                      toast4.out.find("E_F = 6.000000000; P1 = 9.000000000") !=
                          std::string::npos,
                      "toast(4) E_F/P1 line missing");
                  check.require(toast4.out.find("ratio P1/E_F = 1.500000000") !=
                                    std::string::npos,
                                "toast(4) ratio missing");
                  check.within(toast_inefficiency(4), 2.0 * 3.0 / 4.0, 1e-12,
                               "ratio formula");
              });

    criterion(11, "parser round-trip at 1e-12 and positioned rejections",
              [](Checker& check) {
                  std::vector<StateTensor> corpus{
                      ghz(2, 2), ghz(3, 2), ghz(3, 3), toast(2), toast(3),
                      schmidt_state(4, {std::sqrt(0.1), std::sqrt(0.9)}),
                      epsilon_toast(0.0), epsilon_toast(1e-3),
                      pair_graph_state(4, {{0, 1}, {1, 2}, {1, 2}, {2, 3}})};
                  for (std::uint64_t seed = 1; seed <= 20; ++seed)
                      corpus.push_back(testutil::random_small_state(seed + 7000));
                  for (const StateTensor& st : corpus) {
                      const StateTensor back = parse_state_text(render(st));
                      check.require(back.factor_dims == st.factor_dims &&
                                        back.factor_owner == st.factor_owner,
                                    "round-trip changed the factor structure");
                      for (std::size_t i = 0; i < st.total_dim(); ++i)
                          check.within(std::abs(back.amplitudes[i] -
                                                st.amplitudes[i]),
                                       0.0, 1e-12, "round-trip amplitude");
                  }
                  const std::vector<std::string> malformed{
                      "ghz(",          "|01",
                      "foo(3)",        "parties A:2 B:2; |000>",
                      "pairs(A-A)",    "0.5|00> + 0.5|11>",
                      "ghz() + |0>",   "parties A:0; |0>"};
                  for (const std::string& text : malformed) {
                      const RunResult r = run_cli("entropies -e \"" + text + "\"");
                      check.require(r.exit_code == 1,
                                    "expected exit 1 for: " + text);
                      bool positioned = false;
                      for (std::size_t i = 1; i + 1 < r.err.size(); ++i)
                          if (r.err[i] == ':' && std::isdigit(r.err[i - 1]) &&
                              std::isdigit(r.err[i + 1]))
                              positioned = true;
                      check.require(positioned,
                                    "no line:column in stderr for: " + text);
                  }
              });

    std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(failures) +
                                      " criterion(s) FAILED")
              << "\n";
    return failures;
}
