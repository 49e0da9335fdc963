#pragma once

// Seeded random inputs for property tests.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "synthweight/common.hpp"

namespace gen {

using synthweight::Rng;
using synthweight::Tokens;

/// Tokens drawn from a vocabulary of `vocab` short words, so overlaps are common.
inline Tokens tokens(Rng& rng, std::size_t min_len, std::size_t max_len, std::size_t vocab = 8) {
    const std::size_t len = min_len + rng.below(max_len - min_len + 1);
    Tokens t;
    for (std::size_t i = 0; i < len; ++i) t.push_back("w" + std::to_string(rng.below(vocab)));
    return t;
}

inline std::vector<double> reals(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

/// Values on a coarse grid, so ties occur.
inline std::vector<double> grid(Rng& rng, std::size_t n, std::size_t levels = 5) {
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
    return v;
}

inline std::vector<double> binary(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(rng.below(2));
    return v;
}

/// One sentence per rank k = 1..ranks holding round(scale / k^s) copies of "t<k>".
inline std::vector<Tokens> power_law(double scale, std::size_t ranks, double s, std::size_t repeat = 1) {
    std::vector<Tokens> group;
    for (std::size_t k = 1; k <= ranks; ++k) {
        const auto f = static_cast<std::size_t>(std::llround(scale / std::pow(static_cast<double>(k), s)));
        group.emplace_back(f * repeat, "t" + std::to_string(k));
    }
    return group;
}

}  // namespace gen
