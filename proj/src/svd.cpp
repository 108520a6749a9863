#include "dlnlab/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dlnlab {

namespace {

constexpr int kMaxSweeps = 64;
constexpr double kOrthTol = 1.0e-15;

// Column-major workspace: col(j) is contiguous.
struct ColMat {
    std::size_t rows, cols;
    std::vector<double> d;
    ColMat(std::size_t r, std::size_t c) : rows(r), cols(c), d(r * c, 0.0) {}
    double* col(std::size_t j) { return d.data() + j * rows; }
    const double* col(std::size_t j) const { return d.data() + j * rows; }
};

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

// One-sided Jacobi on a tall matrix (m >= n): rotate column pairs of W until
// all pairs are numerically orthogonal, accumulating the rotations in V.
// Then W = U diag(S) with S the column norms.
void jacobi_orthogonalize(ColMat& w, ColMat& v, const Matrix& original) {
    const std::size_t n = w.cols, m = w.rows;
    // Columns at rounding-noise scale count as zero: rotating against them
    // chases noise and never settles.
    double scale_sq = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        scale_sq = std::max(scale_sq, dot(w.col(j), w.col(j), m));
    const double floor_sq = scale_sq * 1e-30;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double* wp = w.col(p);
                double* wq = w.col(q);
                const double app = dot(wp, wp, m);
                const double aqq = dot(wq, wq, m);
                if (app <= floor_sq || aqq <= floor_sq) continue;
                const double apq = dot(wp, wq, m);
                if (std::abs(apq) <= kOrthTol * std::sqrt(app * aqq)) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double a = wp[i], b = wq[i];
                    wp[i] = c * a - s * b;
                    wq[i] = s * a + c * b;
                }
                double* vp = v.col(p);
                double* vq = v.col(q);
                for (std::size_t i = 0; i < n; ++i) {
                    const double a = vp[i], b = vq[i];
                    vp[i] = c * a - s * b;
                    vq[i] = s * a + c * b;
                }
            }
        }
        if (!rotated) return;
    }
    std::ostringstream os;
    os << "svd: Jacobi sweeps did not converge for matrix of shape " << original.shape_str();
    throw DecompositionError(os.str());
}

// Fill U columns whose singular value is numerically zero with vectors
// orthonormal to every column placed so far (canonical candidates, two
// Gram-Schmidt passes, first candidate with a usable residual wins).
void complete_basis(ColMat& u, std::size_t from, std::size_t m) {
    for (std::size_t j = from; j < u.cols; ++j) {
        for (std::size_t cand = 0; cand < m; ++cand) {
            std::vector<double> e(m, 0.0);
            e[cand] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t k = 0; k < j; ++k) {
                    const double s = dot(e.data(), u.col(k), m);
                    const double* uk = u.col(k);
                    for (std::size_t i = 0; i < m; ++i) e[i] -= s * uk[i];
                }
            }
            const double nrm = std::sqrt(dot(e.data(), e.data(), m));
            if (nrm > 0.5) {
                double* uj = u.col(j);
                for (std::size_t i = 0; i < m; ++i) uj[i] = e[i] / nrm;
                break;
            }
        }
    }
}

SvdResult svd_tall(const Matrix& a) {
    const std::size_t m = a.rows, n = a.cols;
    ColMat w(m, n), v(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) w.col(j)[i] = a(i, j);
    for (std::size_t j = 0; j < n; ++j) v.col(j)[j] = 1.0;

    jacobi_orthogonalize(w, v, a);

    std::vector<double> sig(n);
    for (std::size_t j = 0; j < n; ++j) sig[j] = std::sqrt(dot(w.col(j), w.col(j), m));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return sig[i] > sig[j]; });

    SvdResult r;
    r.S.resize(n);
    r.U = Matrix(m, n);
    r.V = Matrix(n, n);
    ColMat u(m, n);
    const double smax = sig.empty() ? 0.0 : sig[order[0]];
    const double tiny = smax * static_cast<double>(std::max(m, n)) *
                        std::numeric_limits<double>::epsilon();
    std::size_t numeric_rank = n;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        r.S[j] = sig[src];
        if (sig[src] > tiny && sig[src] > 0.0) {
            const double inv = 1.0 / sig[src];
            for (std::size_t i = 0; i < m; ++i) u.col(j)[i] = w.col(src)[i] * inv;
        } else if (numeric_rank == n) {
            numeric_rank = j;
        }
        for (std::size_t i = 0; i < n; ++i) r.V(i, j) = v.col(src)[i];
    }
    if (numeric_rank < n) complete_basis(u, numeric_rank, m);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) r.U(i, j) = u.col(j)[i];
    return r;
}

}  // namespace

SvdResult svd(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("svd: empty matrix");
    if (!all_finite(a)) throw std::invalid_argument("svd: matrix has non-finite entries");
    if (a.rows >= a.cols) return svd_tall(a);
    SvdResult t = svd_tall(transpose(a));
    SvdResult r;
    r.U = std::move(t.V);
    r.V = std::move(t.U);
    r.S = std::move(t.S);
    return r;
}

std::vector<double> singular_values(const Matrix& a) { return svd(a).S; }

double spectral_norm(const Matrix& a) { return svd(a).S[0]; }

Matrix svd_reconstruct(const SvdResult& r) {
    Matrix us = r.U;
    for (std::size_t j = 0; j < us.cols; ++j)
        for (std::size_t i = 0; i < us.rows; ++i) us(i, j) *= r.S[j];
    return matmul_nt(us, r.V);
}

}  // namespace dlnlab
