#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace edgartext {

/// Uniform draw from [0, n) by rejection on the top of the 64-bit range.
/// std::uniform_int_distribution is implementation-defined, so sampled outputs
/// would differ across standard libraries; this keeps runs reproducible
/// everywhere for a fixed seed.
inline uint64_t uniform_below(std::mt19937_64& rng, uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

/// First `k` positions of a Fisher-Yates shuffle over [0, n): a uniform sample
/// of k distinct indices, deterministic for a fixed seed.
inline std::vector<size_t> sample_indices(std::mt19937_64& rng, size_t n, size_t k) {
    if (k > n) throw std::invalid_argument("sample_indices: k exceeds n");
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(uniform_below(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace edgartext
