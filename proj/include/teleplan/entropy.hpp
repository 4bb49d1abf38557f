#ifndef TELEPLAN_ENTROPY_HPP
#define TELEPLAN_ENTROPY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "teleplan/errors.hpp"
#include "teleplan/state.hpp"

namespace teleplan {

/// Hermitian, trace-one matrix. Positivity is enforced where eigenvalues are
/// actually computed (von_neumann_entropy).
struct DensityMatrix {
    Eigen::MatrixXcd mat;
    int dim() const { return static_cast<int>(mat.rows()); }
};

inline DensityMatrix density_matrix_from(Eigen::MatrixXcd m,
                                         double tol = kHermTolerance) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument("density matrix must be square and nonempty");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(m.trace().real() - 1.0) > tol || std::abs(m.trace().imag()) > tol)
        throw std::invalid_argument("density matrix trace differs from 1");
    return DensityMatrix{std::move(m)};
}

namespace detail {

/// Complement of `kept` within the factor list.
inline std::vector<int> complement_factors(const StateTensor& st,
                                           const std::vector<int>& kept) {
    std::vector<bool> in(st.num_factors(), false);
    for (int f : kept) {
        if (f < 0 || f >= st.num_factors())
            throw std::invalid_argument("factor index out of range");
        if (in[f]) throw std::invalid_argument("duplicate factor index");
        in[f] = true;
    }
    std::vector<int> out;
    for (int f = 0; f < st.num_factors(); ++f)
        if (!in[f]) out.push_back(f);
    return out;
}

/// Reshape the amplitude vector into a kept x traced matrix.
inline Eigen::MatrixXcd kept_by_traced(const StateTensor& st,
                                       const std::vector<int>& kept,
                                       const std::vector<int>& traced) {
    const auto ko = subset_offsets(st, kept);
    const auto to = subset_offsets(st, traced);
    Eigen::MatrixXcd a(ko.size(), to.size());
    for (std::size_t t = 0; t < to.size(); ++t)
        for (std::size_t k = 0; k < ko.size(); ++k)
            a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) =
                st.amplitudes[ko[k] + to[t]];
    return a;
}

inline double entropy_of_eigenvalues(const Eigen::VectorXd& evals,
                                     double clamp = kEigenvalueClamp,
                                     double floor = kEigenvalueFloor) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        const double lambda = evals[i];
        if (lambda < floor)
            throw NumericError("eigenvalue " + std::to_string(lambda) +
                               " below the negativity floor");
        if (lambda <= clamp) continue; // 0 log 0 == 0
        s -= lambda * std::log2(lambda);
    }
    return s < 0.0 ? 0.0 : s;
}

inline Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m,
                                                           Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("Hermitian eigensolver did not converge");
    return solver.eigenvalues();
}

} // namespace detail

/// Partial trace over the complement of `kept_factors`.
inline DensityMatrix reduced_density(const StateTensor& st,
                                     std::vector<int> kept_factors,
                                     int matrix_limit = kDefaultMatrixLimit) {
    if (kept_factors.empty())
        throw std::invalid_argument("reduced_density: empty factor subset");
    std::sort(kept_factors.begin(), kept_factors.end());
    const auto traced = detail::complement_factors(st, kept_factors);
    std::size_t kept_dim = 1;
    for (int f : kept_factors) kept_dim *= static_cast<std::size_t>(st.factor_dims[f]);
    if (kept_dim > static_cast<std::size_t>(matrix_limit))
        throw DimensionLimitError("reduced density dimension " +
                                  std::to_string(kept_dim) +
                                  " exceeds the matrix limit of " +
                                  std::to_string(matrix_limit));
    const Eigen::MatrixXcd a = detail::kept_by_traced(st, kept_factors, traced);
    Eigen::MatrixXcd rho = a * a.adjoint();
    rho = (rho + rho.adjoint().eval()) / 2.0; // scrub rounding asymmetry
    return DensityMatrix{std::move(rho)};
}

/// S(rho) = -Tr rho log2 rho, in ebits.
inline double von_neumann_entropy(const DensityMatrix& dm) {
    return detail::entropy_of_eigenvalues(detail::hermitian_eigenvalues(dm.mat));
}

/// Entanglement entropy of a factor subset, computed on the Gram matrix of
/// the smaller side of the cut (same nonzero spectrum either way).
inline double cut_entropy(const StateTensor& st, std::vector<int> kept_factors) {
    std::sort(kept_factors.begin(), kept_factors.end());
    const auto traced = detail::complement_factors(st, kept_factors);
    if (kept_factors.empty() || traced.empty()) return 0.0; // pure state
    const Eigen::MatrixXcd a = detail::kept_by_traced(st, kept_factors, traced);
    Eigen::MatrixXcd gram;
    if (a.rows() <= a.cols())
        gram = a * a.adjoint();
    else
        gram = a.adjoint() * a;
    return detail::entropy_of_eigenvalues(detail::hermitian_eigenvalues(gram));
}

enum class Granularity { Party, Factor };

/// Entropies of every subset of a fixed list of units (factor groups),
/// indexed by subset bitmask. Unit 0 is the mask's least significant bit.
struct CutEntropyTable {
    std::vector<std::string> unit_names;
    std::vector<std::vector<int>> unit_factors;
    std::vector<double> ebits; // size 1 << units()

    int units() const { return static_cast<int>(unit_names.size()); }

    double at(std::uint32_t mask) const { return ebits[mask]; }

    std::vector<int> factors_of_mask(std::uint32_t mask) const {
        std::vector<int> out;
        for (int u = 0; u < units(); ++u)
            if ((mask >> u) & 1)
                out.insert(out.end(), unit_factors[u].begin(), unit_factors[u].end());
        return out;
    }
};

/// Table over arbitrary unit groups. Every subset is computed once; the
/// complement half is filled in via S(X) = S(X-bar). Subset computations can
/// fan out to `workers` threads; the result is identical to sequential
/// evaluation.
inline CutEntropyTable cut_entropy_table_for_units(
    const StateTensor& st, std::vector<std::vector<int>> unit_factors,
    std::vector<std::string> unit_names, int workers = 1,
    int max_units = kDefaultMaxUnits) {
    const int n = static_cast<int>(unit_factors.size());
    if (n < 1) throw std::invalid_argument("no units");
    if (n > max_units || n > 20)
        throw DimensionLimitError("unit count " + std::to_string(n) +
                                  " over the limit of " + std::to_string(max_units));
    CutEntropyTable table;
    table.unit_names = std::move(unit_names);
    table.unit_factors = std::move(unit_factors);
    table.ebits.assign(std::size_t(1) << n, 0.0);

    const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
    std::vector<std::uint32_t> work; // masks containing unit 0, excluding full
    for (std::uint32_t m = 1; m < full; m += 2) work.push_back(m);

    auto compute_range = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < work.size(); i += step) {
            const std::uint32_t m = work[i];
            table.ebits[m] = cut_entropy(st, table.factors_of_mask(m));
        }
    };

    const int nthreads = std::max(1, std::min<int>(workers,
                                                   static_cast<int>(work.size())));
    if (nthreads == 1) {
        compute_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(nthreads);
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&, t] {
                try {
                    compute_range(static_cast<std::size_t>(t), nthreads);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    for (std::uint32_t m = 1; m < full; m += 2) table.ebits[full ^ m] = table.ebits[m];
    table.ebits[0] = 0.0;
    table.ebits[full] = 0.0;
    return table;
}

/// Table at party or individual-factor granularity. Factor units are named
/// like cells: "<party><index within party, 1-based>".
inline CutEntropyTable cut_entropy_table(const StateTensor& st,
                                         Granularity granularity,
                                         int workers = 1,
                                         int max_units = kDefaultMaxUnits) {
    std::vector<std::vector<int>> groups;
    std::vector<std::string> names;
    if (granularity == Granularity::Party) {
        for (int p = 0; p < st.num_parties; ++p) {
            groups.push_back(st.party_factors(p));
            names.push_back(st.party_name(p) + "1");
        }
    } else {
        std::vector<int> counter(st.num_parties, 0);
        for (int f = 0; f < st.num_factors(); ++f) {
            const int p = st.factor_owner[f];
            groups.push_back({f});
            names.push_back(st.party_name(p) + std::to_string(++counter[p]));
        }
    }
    return cut_entropy_table_for_units(st, std::move(groups), std::move(names),
                                       workers, max_units);
}

} // namespace teleplan

#endif
