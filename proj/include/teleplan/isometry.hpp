#ifndef TELEPLAN_ISOMETRY_HPP
#define TELEPLAN_ISOMETRY_HPP

#include <Eigen/Dense>
#include <vector>

#include "teleplan/errors.hpp"
#include "teleplan/state.hpp"

namespace teleplan {

/// Local isometry at one party: maps the party's d-dimensional system into a
/// D-dimensional one organized as `output_factor_dims` (product D >= d).
/// `columns` is D x d with orthonormal columns.
struct IsometrySpec {
    int party = 0;
    int input_dim = 0;
    std::vector<int> output_factor_dims;
    Eigen::MatrixXcd columns;
};

inline void validate_isometry(const IsometrySpec& spec, double tol = kHermTolerance) {
    long long out_dim = 1;
    for (int d : spec.output_factor_dims) {
        if (d < 2) throw std::invalid_argument("isometry output dims must be >= 2");
        out_dim *= d;
    }
    if (spec.input_dim < 1 || out_dim < spec.input_dim)
        throw std::invalid_argument("isometry output dimension below input dimension");
    if (spec.columns.rows() != out_dim || spec.columns.cols() != spec.input_dim)
        throw std::invalid_argument("isometry matrix shape mismatch");
    const Eigen::MatrixXcd gram = spec.columns.adjoint() * spec.columns;
    const Eigen::MatrixXcd id =
        Eigen::MatrixXcd::Identity(spec.input_dim, spec.input_dim);
    if ((gram - id).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("matrix is not an isometry");
}

/// Replace one party's factors by the isometry's output factors (inserted at
/// the position of the party's first factor) and transform the amplitudes.
/// The party's local input basis is the mixed-radix product of its factors in
/// global order, first factor most significant.
inline StateTensor apply_isometry(const StateTensor& st, const IsometrySpec& spec,
                                  std::size_t max_amplitudes = kDefaultMaxAmplitudes) {
    if (spec.party < 0 || spec.party >= st.num_parties)
        throw std::invalid_argument("isometry party out of range");
    validate_isometry(spec);
    const std::vector<int> old_factors = st.party_factors(spec.party);
    std::size_t d = 1;
    for (int f : old_factors) d *= static_cast<std::size_t>(st.factor_dims[f]);
    if (d != static_cast<std::size_t>(spec.input_dim))
        throw std::invalid_argument("isometry input dimension does not match party");

    const int insert_at = old_factors.front();
    const int num_out = static_cast<int>(spec.output_factor_dims.size());
    std::vector<int> new_dims, new_owner;
    for (int f = 0; f < st.num_factors(); ++f) {
        if (f == insert_at) {
            for (int od : spec.output_factor_dims) {
                new_dims.push_back(od);
                new_owner.push_back(spec.party);
            }
        }
        if (st.factor_owner[f] == spec.party) continue;
        new_dims.push_back(st.factor_dims[f]);
        new_owner.push_back(st.factor_owner[f]);
    }
    const std::size_t new_total = checked_total_dim(new_dims, max_amplitudes);

    std::vector<int> others_old, others_new, party_new;
    for (int f = 0; f < st.num_factors(); ++f)
        if (st.factor_owner[f] != spec.party) others_old.push_back(f);
    for (int f = 0; f < static_cast<int>(new_dims.size()); ++f) {
        if (f >= insert_at && f < insert_at + num_out)
            party_new.push_back(f);
        else
            others_new.push_back(f);
    }

    StateTensor new_shape; // dims only; used for offset computation
    new_shape.factor_dims = new_dims;
    const auto other_old_offs = subset_offsets(st, others_old);
    const auto party_old_offs = subset_offsets(st, old_factors);
    const auto other_new_offs = subset_offsets(new_shape, others_new);
    const auto party_new_offs = subset_offsets(new_shape, party_new);

    std::vector<cplx> amps(new_total, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < other_old_offs.size(); ++j) {
        for (std::size_t o = 0; o < party_new_offs.size(); ++o) {
            cplx acc(0.0, 0.0);
            for (std::size_t in = 0; in < d; ++in)
                acc += spec.columns(static_cast<Eigen::Index>(o),
                                    static_cast<Eigen::Index>(in)) *
                       st.amplitudes[other_old_offs[j] + party_old_offs[in]];
            amps[other_new_offs[j] + party_new_offs[o]] = acc;
        }
    }
    return make_state(std::move(new_dims), std::move(new_owner), std::move(amps),
                      {.max_amplitudes = max_amplitudes,
                       .party_names = st.party_names});
}

/// The 5-level -> three-qubit embedding used with epsilon_toast states:
/// levels 0..3 map to their two-bit binary expansion on the first two output
/// qubits, level 4 raises the third (ancilla) qubit.
inline IsometrySpec epsilon_toast_embedding(int party) {
    IsometrySpec spec;
    spec.party = party;
    spec.input_dim = 5;
    spec.output_factor_dims = {2, 2, 2};
    spec.columns = Eigen::MatrixXcd::Zero(8, 5);
    for (int j = 0; j < 4; ++j)
        spec.columns(((j >> 1) & 1) * 4 + (j & 1) * 2, j) = 1.0;
    spec.columns(1, 4) = 1.0; // |4> -> |0,0,1>
    return spec;
}

/// Identity embedding that keeps the party's factor structure unchanged.
inline IsometrySpec identity_embedding(const StateTensor& st, int party) {
    IsometrySpec spec;
    spec.party = party;
    spec.input_dim = static_cast<int>(st.party_dim(party));
    for (int f : st.party_factors(party))
        spec.output_factor_dims.push_back(st.factor_dims[f]);
    spec.columns = Eigen::MatrixXcd::Identity(spec.input_dim, spec.input_dim);
    return spec;
}

} // namespace teleplan

#endif
