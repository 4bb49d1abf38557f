#ifndef TELEPLAN_CELLS_HPP
#define TELEPLAN_CELLS_HPP

#include <string>
#include <vector>

#include "teleplan/errors.hpp"
#include "teleplan/state.hpp"

namespace teleplan {

/// A routing unit: a group of factors held by one party. Names follow the
/// "<party><index within party, 1-based>" convention (A1, A2, B1, ...).
struct Cell {
    std::string name;
    int owner = 0;
    std::vector<int> factors; // indices into the layout's factor list
    long long dim = 1;
};

/// Decomposition of a state into cells. `factor_dims`/`factor_owner` describe
/// the (possibly refined) factor list the cells index into; a refinement
/// never permutes amplitudes, it only re-reads the mixed-radix index.
struct CellLayout {
    std::string derivation; // "party" | "native-factors" | "prime-split" | "isometry-extended"
    std::vector<int> factor_dims;
    std::vector<int> factor_owner;
    std::vector<std::string> party_names;
    int num_parties = 0;
    std::vector<Cell> cells;

    int num_cells() const { return static_cast<int>(cells.size()); }

    int cell_index(const std::string& name) const {
        for (int c = 0; c < num_cells(); ++c)
            if (cells[c].name == name) return c;
        return -1;
    }
};

namespace detail {

inline void name_cells_by_party(CellLayout& layout) {
    std::vector<int> counter(layout.num_parties, 0);
    for (Cell& cell : layout.cells)
        cell.name = layout.party_names[cell.owner] +
                    std::to_string(++counter[cell.owner]);
}

inline CellLayout layout_shell(const StateTensor& st, std::string derivation) {
    CellLayout layout;
    layout.derivation = std::move(derivation);
    layout.factor_dims = st.factor_dims;
    layout.factor_owner = st.factor_owner;
    layout.party_names = st.party_names;
    layout.num_parties = st.num_parties;
    return layout;
}

inline std::vector<int> prime_factors_ascending(int n) {
    std::vector<int> primes;
    for (int p = 2; static_cast<long long>(p) * p <= n; ++p)
        while (n % p == 0) {
            primes.push_back(p);
            n /= p;
        }
    if (n > 1) primes.push_back(n);
    return primes;
}

} // namespace detail

/// One cell per party, grouping all of the party's factors.
inline CellLayout party_cells(const StateTensor& st) {
    CellLayout layout = detail::layout_shell(st, "party");
    for (int p = 0; p < st.num_parties; ++p) {
        Cell cell;
        cell.owner = p;
        cell.factors = st.party_factors(p);
        cell.dim = static_cast<long long>(st.party_dim(p));
        layout.cells.push_back(std::move(cell));
    }
    detail::name_cells_by_party(layout);
    return layout;
}

/// One cell per native factor, dimensions as declared.
inline CellLayout native_cells(const StateTensor& st) {
    CellLayout layout = detail::layout_shell(st, "native-factors");
    for (int f = 0; f < st.num_factors(); ++f) {
        Cell cell;
        cell.owner = st.factor_owner[f];
        cell.factors = {f};
        cell.dim = st.factor_dims[f];
        layout.cells.push_back(std::move(cell));
    }
    detail::name_cells_by_party(layout);
    return layout;
}

/// Split every composite factor into prime-dimensional cells via mixed-radix
/// digit decomposition (primes in ascending order, first digit most
/// significant). Amplitudes are untouched; only the factor list is refined.
inline CellLayout prime_split(const StateTensor& st) {
    CellLayout layout = detail::layout_shell(st, "prime-split");
    layout.factor_dims.clear();
    layout.factor_owner.clear();
    for (int f = 0; f < st.num_factors(); ++f) {
        for (int p : detail::prime_factors_ascending(st.factor_dims[f])) {
            Cell cell;
            cell.owner = st.factor_owner[f];
            cell.factors = {static_cast<int>(layout.factor_dims.size())};
            cell.dim = p;
            layout.cells.push_back(std::move(cell));
            layout.factor_dims.push_back(p);
            layout.factor_owner.push_back(st.factor_owner[f]);
        }
    }
    detail::name_cells_by_party(layout);
    return layout;
}

/// View the state through the layout's factor list. The layout must be a
/// positional refinement of the state's factors (each native factor's
/// dimension equal to the product of a consecutive run of layout factors
/// with the same owner).
inline StateTensor refined_state(const StateTensor& st, const CellLayout& layout) {
    std::size_t cursor = 0;
    for (int f = 0; f < st.num_factors(); ++f) {
        long long prod = 1;
        while (prod < st.factor_dims[f]) {
            if (cursor >= layout.factor_dims.size())
                throw std::invalid_argument("layout does not refine the state");
            if (layout.factor_owner[cursor] != st.factor_owner[f])
                throw std::invalid_argument("layout owners do not match the state");
            prod *= layout.factor_dims[cursor++];
        }
        if (prod != st.factor_dims[f])
            throw std::invalid_argument("layout does not refine the state");
    }
    if (cursor != layout.factor_dims.size())
        throw std::invalid_argument("layout has trailing factors");

    StateTensor out;
    out.factor_dims = layout.factor_dims;
    out.factor_owner = layout.factor_owner;
    out.num_parties = st.num_parties;
    out.party_names = st.party_names;
    out.amplitudes = st.amplitudes;
    return out;
}

} // namespace teleplan

#endif
