#ifndef TELEPLAN_TESTS_HELPERS_HPP
#define TELEPLAN_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "teleplan/state.hpp"

namespace testutil {

/// Independent entropy oracle: Shannon entropy (base 2) of a probability
/// vector, evaluated directly from the definition.
inline double shannon_bits(const std::vector<double>& probs) {
    double s = 0.0;
    for (double p : probs)
        if (p > 0.0) s -= p * std::log2(p);
    return s;
}

/// Small random state for property tests: 3-4 parties, 1-2 factors each,
/// dimensions 2-3, deterministic per seed.
inline teleplan::StateTensor random_small_state(std::uint64_t seed,
                                                int max_parties = 4) {
    std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ull);
    const int parties = 3 + static_cast<int>(gen() % (max_parties - 2));
    std::vector<int> dims, owner;
    for (int p = 0; p < parties; ++p) {
        const int factors = 1 + static_cast<int>(gen() % 2);
        for (int f = 0; f < factors; ++f) {
            dims.push_back(2 + static_cast<int>(gen() % 2));
            owner.push_back(p);
        }
    }
    return teleplan::random_state(dims, owner, seed);
}

/// Random qubit-party state with one factor per party.
inline teleplan::StateTensor random_qubit_state(int parties, std::uint64_t seed) {
    std::vector<int> dims(parties, 2), owner(parties);
    for (int p = 0; p < parties; ++p) owner[p] = p;
    return teleplan::random_state(dims, owner, seed);
}

} // namespace testutil

#endif
