#include <catch2/catch.hpp>

#include "helpers.hpp"
#include "teleplan/entropy.hpp"
#include "teleplan/state.hpp"

using namespace teleplan;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

TEST_CASE("make_state builds an EPR pair") {
    const StateTensor st = make_state({2, 2}, {0, 1},
                                      {kInvSqrt2, 0.0, 0.0, kInvSqrt2});
    REQUIRE(st.num_parties == 2);
    REQUIRE(st.total_dim() == 4);
    double norm2 = 0.0;
    for (const cplx& a : st.amplitudes) norm2 += std::norm(a);
    CHECK(norm2 == Approx(1.0).margin(1e-12));
    CHECK(st.party_name(0) == "A");
    CHECK(st.party_name(1) == "B");
}

TEST_CASE("make_state rejects bad input") {
    CHECK_THROWS_WITH(make_state({2, 2}, {0, 1}, {0.0, 0.0, 0.0, 0.0}),
                      Catch::Contains("zero norm"));
    CHECK_THROWS_AS(make_state({2, 2}, {0, 1}, {1.0, 0.0, 0.0}),
                    std::invalid_argument); // length mismatch
    CHECK_THROWS_WITH(make_state({2, 2}, {0, 2}, {kInvSqrt2, 0.0, 0.0, kInvSqrt2}),
                      Catch::Contains("owns no factor"));
    CHECK_THROWS_WITH(make_state({2, 2}, {0, 1}, {1.0, 0.0, 0.0, 1.0}),
                      Catch::Contains("norm"));
    // Renormalization accepts the same amplitudes.
    const StateTensor st = make_state({2, 2}, {0, 1}, {1.0, 0.0, 0.0, 1.0},
                                      {.renormalize = true});
    CHECK(st.amplitudes[0].real() == Approx(kInvSqrt2));
    // Single-party states are not representable.
    CHECK_THROWS_AS(make_state({4}, {0}, {1.0, 0.0, 0.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("make_state keeps explicit Schmidt coefficients") {
    const StateTensor st = make_state({2, 2}, {0, 1}, {0.6, 0.0, 0.0, 0.8});
    CHECK(st.amplitudes[0].real() == Approx(0.6).margin(1e-12));
    CHECK(st.amplitudes[3].real() == Approx(0.8).margin(1e-12));
    const double s = cut_entropy(st, {0});
    CHECK(s == Approx(testutil::shannon_bits({0.36, 0.64})).margin(1e-12));
}

TEST_CASE("ghz states") {
    const StateTensor g32 = ghz(3, 2);
    REQUIRE(g32.total_dim() == 8);
    CHECK(g32.amplitudes[0].real() == Approx(kInvSqrt2));
    CHECK(g32.amplitudes[7].real() == Approx(kInvSqrt2));
    for (std::size_t i = 1; i < 7; ++i)
        CHECK(std::abs(g32.amplitudes[i]) == 0.0);

    // N = 2 cat state is the EPR pair.
    const StateTensor g22 = ghz(2, 2);
    CHECK(g22.amplitudes[0].real() == Approx(kInvSqrt2));
    CHECK(g22.amplitudes[3].real() == Approx(kInvSqrt2));

    const StateTensor g33 = ghz(3, 3);
    REQUIRE(g33.total_dim() == 27);
    const double a = 1.0 / std::sqrt(3.0);
    CHECK(g33.amplitudes[0].real() == Approx(a));
    CHECK(g33.amplitudes[13].real() == Approx(a)); // |111> = 9 + 3 + 1
    CHECK(g33.amplitudes[26].real() == Approx(a));

    CHECK_THROWS_AS(ghz(1, 2), std::invalid_argument);
    CHECK_THROWS_AS(ghz(3, 1), std::invalid_argument);
}

TEST_CASE("schmidt states") {
    // Equal-weight pair of coefficients gives the cat state.
    const StateTensor s = schmidt_state(3, {kInvSqrt2, kInvSqrt2});
    const StateTensor g = ghz(3, 2);
    for (std::size_t i = 0; i < s.total_dim(); ++i)
        CHECK(std::abs(s.amplitudes[i] - g.amplitudes[i]) < 1e-12);

    // Frozen oracle value: shannon_bits({0.1, 0.9}) = 0.4689955935892812.
    const StateTensor t = schmidt_state(4, {std::sqrt(0.1), std::sqrt(0.9)});
    const CutEntropyTable table = cut_entropy_table(t, Granularity::Party);
    const double expected = testutil::shannon_bits({0.1, 0.9});
    CHECK(expected == Approx(0.4689955935892812).margin(1e-15));
    for (std::uint32_t mask = 1; mask < 15u; ++mask)
        CHECK(table.at(mask) == Approx(expected).margin(1e-9));

    // (1, 0) is a product state.
    const StateTensor p = schmidt_state(2, {1.0, 0.0});
    CHECK(cut_entropy(p, {0}) == Approx(0.0).margin(1e-12));

    CHECK_THROWS_WITH(schmidt_state(3, {0.5, 0.5}),
                      Catch::Contains("not normalized"));
    CHECK_THROWS_AS(schmidt_state(3, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(schmidt_state(3, {-0.6, 0.8}), std::invalid_argument);
}

TEST_CASE("toast states") {
    // toast(3) is the displayed product of EPR pairs: with pair bits
    // (x, y, z) for AB, AC, BC the basis string is A1A2 B1B2 C1C2 =
    // x y x z y z.
    const StateTensor t3 = toast(3);
    REQUIRE(t3.total_dim() == 64);
    const double a = std::pow(0.5, 1.5);
    int nonzero = 0;
    for (std::size_t idx = 0; idx < 64; ++idx) {
        const int b0 = (idx >> 5) & 1, b1 = (idx >> 4) & 1, b2 = (idx >> 3) & 1,
                  b3 = (idx >> 2) & 1, b4 = (idx >> 1) & 1, b5 = int(idx) & 1;
        const bool support = b0 == b2 && b1 == b4 && b3 == b5;
        if (support) {
            ++nonzero;
            CHECK(t3.amplitudes[idx].real() == Approx(a).margin(1e-12));
        } else {
            CHECK(std::abs(t3.amplitudes[idx]) == 0.0);
        }
    }
    CHECK(nonzero == 8);

    const StateTensor t2 = toast(2);
    CHECK(t2.amplitudes[0].real() == Approx(kInvSqrt2));
    CHECK(t2.amplitudes[3].real() == Approx(kInvSqrt2));

    // Single-party cuts of toast(4) have entropy 3.
    const StateTensor t4 = toast(4);
    for (int p = 0; p < 4; ++p)
        CHECK(cut_entropy(t4, t4.party_factors(p)) == Approx(3.0).margin(1e-9));

    CHECK_THROWS_AS(toast(6), DimensionLimitError);
}

TEST_CASE("epsilon toast") {
    const StateTensor e0 = epsilon_toast(0.0);
    REQUIRE(e0.total_dim() == 125);
    for (int p = 0; p < 3; ++p)
        CHECK(cut_entropy(e0, {p}) == Approx(2.0).margin(1e-9));

    const StateTensor e1 = epsilon_toast(1.0);
    CHECK(std::abs(e1.amplitudes[124] - cplx(1.0, 0.0)) < 1e-12);
    for (int p = 0; p < 3; ++p)
        CHECK(cut_entropy(e1, {p}) == Approx(0.0).margin(1e-12));

    // Exact perturbed entropy: eigenvalues of rho_A are (1-eps)/4 (x4) and
    // eps; compare against the direct Shannon oracle.
    const double eps = 1e-3;
    const StateTensor ee = epsilon_toast(eps);
    const double expected = testutil::shannon_bits(
        {(1 - eps) / 4, (1 - eps) / 4, (1 - eps) / 4, (1 - eps) / 4, eps});
    CHECK(expected == Approx(2.0094077986580747).margin(1e-14));
    CHECK(cut_entropy(ee, {0}) == Approx(expected).margin(1e-12));
    CHECK(std::abs(cut_entropy(ee, {0}) - 2.0) < 0.02);

    CHECK_THROWS_AS(epsilon_toast(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(epsilon_toast(1.1), std::invalid_argument);
}

TEST_CASE("pair graph states") {
    // Reconstructed pairing for the 4-party example: A-B, B-C, B-C, C-D
    // reproduces the quoted entropies S_A=1, S_B=3, S_D=1, S_AB=2. All four
    // are checked through the reduced-density path.
    const StateTensor fig1 = pair_graph_state(4, {{0, 1}, {1, 2}, {1, 2}, {2, 3}});
    CHECK(von_neumann_entropy(reduced_density(fig1, fig1.party_factors(0))) ==
          Approx(1.0).margin(1e-9));
    CHECK(von_neumann_entropy(reduced_density(fig1, fig1.party_factors(1))) ==
          Approx(3.0).margin(1e-9));
    CHECK(von_neumann_entropy(reduced_density(fig1, fig1.party_factors(3))) ==
          Approx(1.0).margin(1e-9));
    std::vector<int> ab = fig1.party_factors(0);
    for (int f : fig1.party_factors(1)) ab.push_back(f);
    CHECK(von_neumann_entropy(reduced_density(fig1, ab)) ==
          Approx(2.0).margin(1e-9));

    const StateTensor epr = pair_graph_state(2, {{0, 1}});
    CHECK(epr.amplitudes[0].real() == Approx(kInvSqrt2));

    // Two broken pairs leave A maximally mixed on 4 levels.
    const StateTensor dbl = pair_graph_state(2, {{0, 1}, {0, 1}});
    CHECK(cut_entropy(dbl, dbl.party_factors(0)) == Approx(2.0).margin(1e-9));

    CHECK_THROWS_WITH(pair_graph_state(3, {{0, 0}}), Catch::Contains("differ"));
    CHECK_THROWS_AS(pair_graph_state(2, {{0, 5}}), std::invalid_argument);
    // A party owning no factor is rejected.
    CHECK_THROWS_WITH(pair_graph_state(3, {{0, 1}}),
                      Catch::Contains("owns no factor"));
}

TEST_CASE("random states are deterministic and normalized") {
    const StateTensor a = random_state({2, 3, 2}, {0, 1, 2}, 42);
    const StateTensor b = random_state({2, 3, 2}, {0, 1, 2}, 42);
    REQUIRE(a.total_dim() == b.total_dim());
    for (std::size_t i = 0; i < a.total_dim(); ++i)
        CHECK(a.amplitudes[i] == b.amplitudes[i]);
    const StateTensor c = random_state({2, 3, 2}, {0, 1, 2}, 43);
    CHECK(a.amplitudes[0] != c.amplitudes[0]);

    for (std::uint64_t seed : {1, 2, 3}) {
        const StateTensor st = testutil::random_small_state(seed);
        double norm2 = 0.0;
        for (const cplx& amp : st.amplitudes) norm2 += std::norm(amp);
        CHECK(norm2 == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("amplitude cap is enforced") {
    CHECK_THROWS_AS(ghz(23, 2), DimensionLimitError);
    CHECK_THROWS_AS(random_state({2, 2}, {0, 1}, 1, 2), DimensionLimitError);
}
