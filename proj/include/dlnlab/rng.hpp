#pragma once

#include <cstdint>
#include <random>

#include "dlnlab/matrix.hpp"

namespace dlnlab {

// Seeded 64-bit PRNG (mt19937_64) with explicit float mappings, so streams
// are bit-reproducible for a given seed. The standard distributions are
// implementation-defined and deliberately not used here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform01_open() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian();

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Entries drawn in column-major order (fixed consumption order is part of the
// determinism contract).
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);
Matrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = 0.0,
                      double hi = 1.0);

// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
// the R-diagonal sign correction.
Matrix haar_orthogonal(std::size_t dim, Rng& rng);
Matrix haar_orthogonal(std::size_t dim, std::uint64_t seed);

}  // namespace dlnlab
