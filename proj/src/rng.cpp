#include "dlnlab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dlnlab {

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
    return m;
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
    Matrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
    return m;
}

// Householder QR of a square Gaussian matrix; Q columns are sign-corrected so
// diag(R) > 0, which makes the result Haar-distributed.
Matrix haar_orthogonal(std::size_t dim, Rng& rng) {
    if (dim < 1) throw std::invalid_argument("haar_orthogonal: dim must be >= 1");
    const std::size_t n = dim;
    Matrix a = gaussian_matrix(n, n, rng);

    // In-place Householder vectors; beta[k] holds the reflector scale.
    std::vector<double> beta(n, 0.0);
    std::vector<double> rdiag(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            rdiag[k] = 0.0;
            continue;
        }
        const double alpha = (a(k, k) >= 0.0) ? -norm : norm;
        rdiag[k] = alpha;
        // v = x - alpha e_k, stored in column k below the diagonal.
        a(k, k) -= alpha;
        double vtv = 0.0;
        for (std::size_t i = k; i < n; ++i) vtv += a(i, k) * a(i, k);
        beta[k] = (vtv > 0.0) ? 2.0 / vtv : 0.0;
        for (std::size_t j = k + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += a(i, k) * a(i, j);
            s *= beta[k];
            for (std::size_t i = k; i < n; ++i) a(i, j) -= s * a(i, k);
        }
    }

    // Accumulate Q = H_0 H_1 ... H_{n-1} by applying reflectors to I backwards.
    Matrix q = Matrix::identity(n);
    for (std::size_t kk = n; kk-- > 0;) {
        if (beta[kk] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = kk; i < n; ++i) s += a(i, kk) * q(i, j);
            s *= beta[kk];
            for (std::size_t i = kk; i < n; ++i) q(i, j) -= s * a(i, kk);
        }
    }

    // Sign correction: flip columns where diag(R) came out negative.
    for (std::size_t k = 0; k < n; ++k) {
        if (rdiag[k] < 0.0)
            for (std::size_t i = 0; i < n; ++i) q(i, k) = -q(i, k);
    }
    return q;
}

Matrix haar_orthogonal(std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    return haar_orthogonal(dim, rng);
}

}  // namespace dlnlab
