#ifndef TELEPLAN_STATE_HPP
#define TELEPLAN_STATE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "teleplan/errors.hpp"

namespace teleplan {

using cplx = std::complex<double>;

// Default caps and tolerances shared across the library.
inline constexpr std::size_t kDefaultMaxAmplitudes = std::size_t(1) << 22;
inline constexpr int kDefaultMaxUnits = 16;
inline constexpr int kDefaultMatrixLimit = 4096;
inline constexpr double kNormTolerance = 1e-6;
inline constexpr double kHermTolerance = 1e-9;
inline constexpr double kEigenvalueClamp = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-9;

/// Display label for a party index: A, B, C, ...
inline std::string party_label(int party) {
    if (party >= 0 && party < 26) return std::string(1, char('A' + party));
    return "P" + std::to_string(party);
}

/// Dense N-partite pure state.
///
/// Amplitudes are indexed in mixed radix over the tensor factors, factor 0
/// most significant. Each factor is owned by exactly one party; a party may
/// own several factors (its local basis is the mixed-radix product of its
/// factors in global order, first factor most significant).
struct StateTensor {
    std::vector<int> factor_dims;        // dimension of each factor, >= 2
    std::vector<int> factor_owner;       // party index per factor
    int num_parties = 0;
    std::vector<std::string> party_names; // display names, defaults A, B, ...
    std::vector<cplx> amplitudes;        // length = product of factor_dims

    int num_factors() const { return static_cast<int>(factor_dims.size()); }

    std::size_t total_dim() const { return amplitudes.size(); }

    /// stride[f] = product of dims of factors after f.
    std::vector<std::size_t> strides() const {
        std::vector<std::size_t> s(factor_dims.size(), 1);
        for (int f = num_factors() - 2; f >= 0; --f)
            s[f] = s[f + 1] * static_cast<std::size_t>(factor_dims[f + 1]);
        return s;
    }

    /// Factors owned by `party`, in ascending global order.
    std::vector<int> party_factors(int party) const {
        std::vector<int> out;
        for (int f = 0; f < num_factors(); ++f)
            if (factor_owner[f] == party) out.push_back(f);
        return out;
    }

    std::size_t party_dim(int party) const {
        std::size_t d = 1;
        for (int f : party_factors(party)) d *= static_cast<std::size_t>(factor_dims[f]);
        return d;
    }

    const std::string& party_name(int party) const { return party_names[party]; }

    int party_index(const std::string& name) const {
        for (int p = 0; p < num_parties; ++p)
            if (party_names[p] == name) return p;
        return -1;
    }
};

struct MakeOptions {
    bool renormalize = false;
    std::size_t max_amplitudes = kDefaultMaxAmplitudes;
    std::vector<std::string> party_names; // empty = default labels
};

/// Product of dims with the size cap enforced. Throws DimensionLimitError.
inline std::size_t checked_total_dim(const std::vector<int>& dims,
                                     std::size_t max_amplitudes) {
    std::size_t prod = 1;
    for (int d : dims) {
        if (d < 2) throw std::invalid_argument("factor dimension must be >= 2");
        if (prod > max_amplitudes / static_cast<std::size_t>(d))
            throw DimensionLimitError(
                "state dimension exceeds the amplitude cap of " +
                std::to_string(max_amplitudes));
        prod *= static_cast<std::size_t>(d);
    }
    return prod;
}

/// Validate and assemble a StateTensor. The result is always exactly
/// normalized: deviations within the norm tolerance are silently corrected,
/// larger ones are rejected unless `renormalize` is set.
inline StateTensor make_state(std::vector<int> factor_dims,
                              std::vector<int> factor_owner,
                              std::vector<cplx> amplitudes,
                              const MakeOptions& opts = {}) {
    if (factor_dims.empty())
        throw std::invalid_argument("state needs at least one factor");
    if (factor_dims.size() != factor_owner.size())
        throw std::invalid_argument("factor_dims and factor_owner lengths differ");

    const std::size_t dim = checked_total_dim(factor_dims, opts.max_amplitudes);
    if (dim != amplitudes.size())
        throw std::invalid_argument(
            "amplitude vector length " + std::to_string(amplitudes.size()) +
            " does not match total dimension " + std::to_string(dim));

    int num_parties = 0;
    for (int p : factor_owner) {
        if (p < 0) throw std::invalid_argument("negative party index");
        num_parties = std::max(num_parties, p + 1);
    }
    if (num_parties < 2)
        throw std::invalid_argument("a state needs at least 2 parties");
    std::vector<bool> owns(num_parties, false);
    for (int p : factor_owner) owns[p] = true;
    for (int p = 0; p < num_parties; ++p)
        if (!owns[p])
            throw std::invalid_argument("party " + party_label(p) +
                                        " owns no factor");

    double norm2 = 0.0;
    for (const cplx& a : amplitudes) norm2 += std::norm(a);
    const double norm = std::sqrt(norm2);
    if (norm < 1e-15) throw std::invalid_argument("zero norm");
    if (std::abs(norm - 1.0) > kNormTolerance && !opts.renormalize)
        throw std::invalid_argument("norm " + std::to_string(norm) +
                                    " out of tolerance (pass renormalize to accept)");
    for (cplx& a : amplitudes) a /= norm;

    StateTensor st;
    st.factor_dims = std::move(factor_dims);
    st.factor_owner = std::move(factor_owner);
    st.num_parties = num_parties;
    st.amplitudes = std::move(amplitudes);
    if (!opts.party_names.empty()) {
        if (static_cast<int>(opts.party_names.size()) != num_parties)
            throw std::invalid_argument("party_names length mismatch");
        st.party_names = opts.party_names;
    } else {
        st.party_names.reserve(num_parties);
        for (int p = 0; p < num_parties; ++p) st.party_names.push_back(party_label(p));
    }
    return st;
}

/// Generalized N-party cat state over k-level subsystems:
/// equal weight on the k diagonal basis strings.
inline StateTensor ghz(int n, int k = 2,
                       std::size_t max_amplitudes = kDefaultMaxAmplitudes) {
    if (n < 2) throw std::invalid_argument("ghz: need at least 2 parties");
    if (k < 2) throw std::invalid_argument("ghz: need at least 2 levels");
    std::vector<int> dims(n, k), owner(n);
    for (int p = 0; p < n; ++p) owner[p] = p;
    const std::size_t dim = checked_total_dim(dims, max_amplitudes);
    std::vector<cplx> amps(dim, cplx(0.0, 0.0));
    const double a = 1.0 / std::sqrt(double(k));
    // index of |j,j,...,j> = j * (k^n - 1) / (k - 1)
    std::size_t diag = 0;
    for (int f = 0; f < n; ++f) diag = diag * k + 1;
    for (int j = 0; j < k; ++j) amps[static_cast<std::size_t>(j) * diag] = a;
    return make_state(std::move(dims), std::move(owner), std::move(amps),
                      {.max_amplitudes = max_amplitudes});
}

/// State with identical local Schmidt bases at every party: amplitude
/// coeffs[i] on the i-th diagonal string, 0 elsewhere.
inline StateTensor schmidt_state(int n, const std::vector<double>& coeffs,
                                 std::size_t max_amplitudes = kDefaultMaxAmplitudes) {
    if (n < 2) throw std::invalid_argument("schmidt_state: need at least 2 parties");
    const int k = static_cast<int>(coeffs.size());
    if (k < 2)
        throw std::invalid_argument("schmidt_state: need at least 2 coefficients");
    double sum2 = 0.0;
    int nonzero = 0;
    for (double c : coeffs) {
        if (c < 0.0 || !std::isfinite(c))
            throw std::invalid_argument("schmidt_state: coefficients must be real and nonnegative");
        if (c > 0.0) ++nonzero;
        sum2 += c * c;
    }
    if (nonzero < 1) throw std::invalid_argument("schmidt_state: all coefficients zero");
    if (std::abs(sum2 - 1.0) > 1e-9)
        throw std::invalid_argument("schmidt_state: coefficients not normalized");
    std::vector<int> dims(n, k), owner(n);
    for (int p = 0; p < n; ++p) owner[p] = p;
    const std::size_t dim = checked_total_dim(dims, max_amplitudes);
    std::vector<cplx> amps(dim, cplx(0.0, 0.0));
    std::size_t diag = 0;
    for (int f = 0; f < n; ++f) diag = diag * k + 1;
    for (int j = 0; j < k; ++j) amps[static_cast<std::size_t>(j) * diag] = coeffs[j];
    return make_state(std::move(dims), std::move(owner), std::move(amps),
                      {.max_amplitudes = max_amplitudes});
}

struct PartyPair {
    int a;
    int b;
};

/// Tensor product of one EPR pair per list entry. Factors are laid out
/// party-major: party 0's qubits first (in pair-list order), then party 1's,
/// and so on. Multiplicity is allowed.
inline StateTensor pair_graph_state(int n, const std::vector<PartyPair>& pairs,
                                    const MakeOptions& opts = {}) {
    if (n < 2) throw std::invalid_argument("pair_graph_state: need at least 2 parties");
    if (pairs.empty()) throw std::invalid_argument("pair_graph_state: no pairs");
    std::vector<bool> covered(n, false);
    for (const PartyPair& pr : pairs) {
        if (pr.a < 0 || pr.a >= n || pr.b < 0 || pr.b >= n)
            throw std::invalid_argument("pair_graph_state: party out of range");
        if (pr.a == pr.b)
            throw std::invalid_argument("pair_graph_state: pair endpoints must differ");
        covered[pr.a] = covered[pr.b] = true;
    }
    for (int p = 0; p < n; ++p)
        if (!covered[p])
            throw std::invalid_argument("party " + party_label(p) + " owns no factor");
    const int num_pairs = static_cast<int>(pairs.size());

    // One qubit factor per pair endpoint; global order party-major, within a
    // party by pair-list order.
    std::vector<int> dims, owner;
    std::vector<int> factor_of_pair_at(static_cast<std::size_t>(num_pairs) * 2, -1);
    for (int party = 0; party < n; ++party) {
        for (int p = 0; p < num_pairs; ++p) {
            for (int side = 0; side < 2; ++side) {
                const int endpoint = side == 0 ? pairs[p].a : pairs[p].b;
                if (endpoint != party) continue;
                factor_of_pair_at[2 * p + side] = static_cast<int>(dims.size());
                dims.push_back(2);
                owner.push_back(party);
            }
        }
    }

    const std::size_t dim = checked_total_dim(dims, opts.max_amplitudes);
    std::vector<cplx> amps(dim, cplx(0.0, 0.0));
    std::vector<std::size_t> stride(dims.size(), 1);
    for (int f = static_cast<int>(dims.size()) - 2; f >= 0; --f)
        stride[f] = stride[f + 1] * static_cast<std::size_t>(dims[f + 1]);
    const double a = std::pow(0.5, double(num_pairs) / 2.0);
    for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << num_pairs); ++bits) {
        std::size_t idx = 0;
        for (int p = 0; p < num_pairs; ++p) {
            if ((bits >> p) & 1) {
                idx += stride[factor_of_pair_at[2 * p]];
                idx += stride[factor_of_pair_at[2 * p + 1]];
            }
        }
        amps[idx] = a;
    }
    return make_state(std::move(dims), std::move(owner), std::move(amps), opts);
}

/// One EPR pair between each pair of N parties; party i owns N-1 qubits,
/// its k-th qubit paired with the k-th other party in ascending order.
inline StateTensor toast(int n, std::size_t max_amplitudes = kDefaultMaxAmplitudes) {
    if (n < 2) throw std::invalid_argument("toast: need at least 2 parties");
    std::vector<PartyPair> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
    return pair_graph_state(n, pairs, {.max_amplitudes = max_amplitudes});
}

/// Tripartite 5x5x5 state: sqrt(1-eps) times a relabeled 3-party toast state
/// plus sqrt(eps) on |4,4,4>. The toast support lives on levels 0..3 of each
/// party: with pair bits (x, y, z) for the AB, AC, BC pairs, the levels are
/// a = 2x+y, b = 2x+z, c = 2y+z.
inline StateTensor epsilon_toast(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0))
        throw std::invalid_argument("epsilon_toast: eps must lie in [0, 1]");
    std::vector<int> dims{5, 5, 5}, owner{0, 1, 2};
    std::vector<cplx> amps(125, cplx(0.0, 0.0));
    const double t = std::sqrt((1.0 - eps) / 8.0);
    for (int bits = 0; bits < 8; ++bits) {
        const int x = (bits >> 2) & 1, y = (bits >> 1) & 1, z = bits & 1;
        const int a = 2 * x + y, b = 2 * x + z, c = 2 * y + z;
        amps[static_cast<std::size_t>(a) * 25 + b * 5 + c] = t;
    }
    amps[4 * 25 + 4 * 5 + 4] = std::sqrt(eps);
    return make_state(std::move(dims), std::move(owner), std::move(amps));
}

/// Deterministic pseudo-random normalized state (Gaussian amplitudes via an
/// explicit Box-Muller transform so results match across platforms).
inline StateTensor random_state(std::vector<int> factor_dims,
                                std::vector<int> factor_owner,
                                std::uint64_t seed,
                                std::size_t max_amplitudes = kDefaultMaxAmplitudes) {
    const std::size_t dim = checked_total_dim(factor_dims, max_amplitudes);
    std::mt19937_64 gen(seed);
    auto uniform = [&gen]() {
        return (double(gen() >> 11) + 0.5) * 0x1.0p-53; // in (0, 1)
    };
    std::vector<cplx> amps(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double phi = 2.0 * 3.14159265358979323846 * uniform();
        amps[i] = cplx(r * std::cos(phi), r * std::sin(phi));
    }
    return make_state(std::move(factor_dims), std::move(factor_owner),
                      std::move(amps),
                      {.renormalize = true, .max_amplitudes = max_amplitudes});
}

/// Mixed-radix offsets of a factor subset: entry k is the linear offset of
/// the k-th joint basis state of `factors` (ascending global order, first
/// factor most significant), all other digits zero.
inline std::vector<std::size_t> subset_offsets(const StateTensor& st,
                                               const std::vector<int>& factors) {
    const auto stride = st.strides();
    std::vector<std::size_t> offs{0};
    for (int f : factors) {
        const int d = st.factor_dims[f];
        std::vector<std::size_t> next;
        next.reserve(offs.size() * static_cast<std::size_t>(d));
        for (std::size_t o : offs)
            for (int v = 0; v < d; ++v)
                next.push_back(o + static_cast<std::size_t>(v) * stride[f]);
        offs = std::move(next);
    }
    return offs;
}

} // namespace teleplan

#endif
