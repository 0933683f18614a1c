// Deterministic random numbers. All distribution sampling is implemented by
// hand on top of mt19937_64 so that streams are bit-identical across standard
// libraries and platforms.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gvd/errors.hpp"

namespace gvd {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// One link in a seed derivation chain. Stage tags, class ids and instance
// indices are folded in one at a time: seed_chain(seed_chain(s, tag), idx).
inline uint64_t seed_chain(uint64_t seed, uint64_t salt) {
    return splitmix64(seed ^ splitmix64(salt));
}

// Stable 64-bit tag for a stage name (FNV-1a).
inline uint64_t seed_tag(std::string_view name) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the pair's second value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Unbiased integer in [0, n) via rejection on the top of the 64-bit range.
    uint64_t bounded(uint64_t n) {
        if (n == 0) throw error(error_kind::precondition, "bounded draw from empty range");
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    Eigen::VectorXd normal_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = normal();
        return v;
    }

    Eigen::MatrixXd normal_matrix(int rows, int cols) {
        Eigen::MatrixXd m(rows, cols);
        // Row-major fill so a frames-by-dim draw matches the flattened order.
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = normal();
        return m;
    }

    // Fisher-Yates shuffle, in place.
    template <typename T>
    void shuffle(std::vector<T> & items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = size_t(bounded(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gvd
