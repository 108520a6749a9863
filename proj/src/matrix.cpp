#include "dlnlab/matrix.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dlnlab {

namespace {

// OpenMP is only worth firing up when there is real work; below this many
// multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelFlopCutoff = 64 * 1024;

void check_mul_shapes(std::size_t inner_a, std::size_t inner_b,
                      const Matrix& a, const Matrix& b, const char* op) {
    if (inner_a != inner_b) {
        std::ostringstream os;
        os << op << ": incompatible shapes " << a.shape_str() << " and " << b.shape_str();
        throw std::invalid_argument(os.str());
    }
}

// Shared microkernel layout: process four C rows per pass so each k step
// carries four independent fused multiply-add chains. Every C entry is still
// accumulated in ascending k order, so the serial and OpenMP paths (and any
// thread count) produce bit-identical results. The A operand is addressed
// through (arstep, astep) so the same code serves A and A^T access.
inline void gemm_rows4(double* __restrict c0, double* __restrict c1, double* __restrict c2,
                       double* __restrict c3, const double* __restrict a, std::size_t arstep,
                       std::size_t astep, const double* __restrict b, std::size_t ldb,
                       std::size_t kk, std::size_t n) {
    for (std::size_t k = 0; k < kk; ++k) {
        const std::size_t ak = k * astep;
        const double x0 = a[ak];
        const double x1 = a[arstep + ak];
        const double x2 = a[2 * arstep + ak];
        const double x3 = a[3 * arstep + ak];
        const double* __restrict bk = b + k * ldb;
        for (std::size_t j = 0; j < n; ++j) {
            const double bj = bk[j];
            c0[j] += x0 * bj;
            c1[j] += x1 * bj;
            c2[j] += x2 * bj;
            c3[j] += x3 * bj;
        }
    }
}

inline void gemm_row1(double* __restrict c, const double* __restrict a, std::size_t astep,
                      const double* __restrict b, std::size_t ldb, std::size_t kk,
                      std::size_t n) {
    for (std::size_t k = 0; k < kk; ++k) {
        const double aik = a[k * astep];
        const double* __restrict bk = b + k * ldb;
        for (std::size_t j = 0; j < n; ++j) c[j] += aik * bk[j];
    }
}

// m x n result from an m x kk row-view of A (row stride arstep, in-row step
// astep) against B rows of leading dimension ldb. C must be zeroed.
void gemm(double* c, std::size_t m, std::size_t n, const double* a, std::size_t arstep,
          std::size_t astep, const double* b, std::size_t ldb, std::size_t kk) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * kk * n > kParallelFlopCutoff)
#endif
    for (long long g = 0; g < static_cast<long long>(m / 4); ++g) {
        const std::size_t i = static_cast<std::size_t>(g) * 4;
        double* ci = c + i * n;
        gemm_rows4(ci, ci + n, ci + 2 * n, ci + 3 * n, a + i * arstep, arstep, astep, b, ldb,
                   kk, n);
    }
    for (std::size_t i = m - m % 4; i < m; ++i)
        gemm_row1(c + i * n, a + i * arstep, astep, b, ldb, kk, n);
}

void gemm_serial(double* c, std::size_t m, std::size_t n, const double* a, std::size_t arstep,
                 std::size_t astep, const double* b, std::size_t ldb, std::size_t kk) {
    for (std::size_t i = 0; i + 4 <= m; i += 4) {
        double* ci = c + i * n;
        gemm_rows4(ci, ci + n, ci + 2 * n, ci + 3 * n, a + i * arstep, arstep, astep, b, ldb,
                   kk, n);
    }
    for (std::size_t i = m - m % 4; i < m; ++i)
        gemm_row1(c + i * n, a + i * arstep, astep, b, ldb, kk, n);
}

}  // namespace

std::string Matrix::shape_str() const {
    std::ostringstream os;
    os << rows << "x" << cols;
    return os.str();
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows != b.rows || a.cols != b.cols) {
        std::ostringstream os;
        os << op << ": incompatible shapes " << a.shape_str() << " and " << b.shape_str();
        throw std::invalid_argument(os.str());
    }
}

// Row blocks of C depend only on the matching rows of A, so the row loop
// parallelizes cleanly; serial and parallel runs are bit-equal.
void matmul_into(Matrix& c, const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.cols, b.rows, a, b, "matmul");
    c.rows = a.rows;
    c.cols = b.cols;
    c.data.assign(a.rows * b.cols, 0.0);
    gemm(c.data.data(), a.rows, b.cols, a.data.data(), a.cols, 1, b.data.data(), b.cols,
         a.cols);
}

void matmul_into_serial(Matrix& c, const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.cols, b.rows, a, b, "matmul");
    c.rows = a.rows;
    c.cols = b.cols;
    c.data.assign(a.rows * b.cols, 0.0);
    gemm_serial(c.data.data(), a.rows, b.cols, a.data.data(), a.cols, 1, b.data.data(), b.cols,
                a.cols);
}

// C = A^T B: row i of the A-view is column i of A (stride a.cols).
void matmul_tn_into(Matrix& c, const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.rows, b.rows, a, b, "matmul_tn");
    c.rows = a.cols;
    c.cols = b.cols;
    c.data.assign(a.cols * b.cols, 0.0);
    gemm(c.data.data(), a.cols, b.cols, a.data.data(), 1, a.cols, b.data.data(), b.cols,
         a.rows);
}

void matmul_tn_into_serial(Matrix& c, const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.rows, b.rows, a, b, "matmul_tn");
    c.rows = a.cols;
    c.cols = b.cols;
    c.data.assign(a.cols * b.cols, 0.0);
    gemm_serial(c.data.data(), a.cols, b.cols, a.data.data(), 1, a.cols, b.data.data(), b.cols,
                a.rows);
}

// C = A B^T. B is transposed into a scratch buffer once so the kernel
// streams contiguous rows; the per-entry summation order is unchanged.
void matmul_nt_into(Matrix& c, const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.cols, b.cols, a, b, "matmul_nt");
    thread_local Matrix scratch;
    scratch.rows = b.cols;
    scratch.cols = b.rows;
    scratch.data.resize(b.rows * b.cols);
    for (std::size_t i = 0; i < b.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) scratch.data[j * b.rows + i] = b(i, j);
    c.rows = a.rows;
    c.cols = b.rows;
    c.data.assign(a.rows * b.rows, 0.0);
    // Hoisted: thread_local storage must not be re-resolved inside the
    // parallel region, where each worker would see its own instance.
    const double* bt = scratch.data.data();
    gemm(c.data.data(), a.rows, b.rows, a.data.data(), a.cols, 1, bt, b.rows, a.cols);
}

void matmul_nt_into_serial(Matrix& c, const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.cols, b.cols, a, b, "matmul_nt");
    thread_local Matrix scratch;
    scratch.rows = b.cols;
    scratch.cols = b.rows;
    scratch.data.resize(b.rows * b.cols);
    for (std::size_t i = 0; i < b.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) scratch.data[j * b.rows + i] = b(i, j);
    c.rows = a.rows;
    c.cols = b.rows;
    c.data.assign(a.rows * b.rows, 0.0);
    gemm_serial(c.data.data(), a.rows, b.rows, a.data.data(), a.cols, 1, scratch.data.data(),
                b.rows, a.cols);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c;
    matmul_into(c, a, b);
    return c;
}

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
    Matrix c;
    matmul_into_serial(c, a, b);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    Matrix c;
    matmul_tn_into(c, a, b);
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    Matrix c;
    matmul_nt_into(c, a, b);
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "add");
    Matrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] + b.data[i];
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "sub");
    Matrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] - b.data[i];
    return c;
}

Matrix operator*(double t, const Matrix& a) {
    Matrix c(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = t * a.data[i];
    return c;
}

double frob_norm_sq(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return s;
}

double frob_norm(const Matrix& a) { return std::sqrt(frob_norm_sq(a)); }

bool all_finite(const Matrix& a) {
    for (double v : a.data)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix kron_identity_ones(std::size_t K, std::size_t n) {
    if (K < 1 || n < 1) throw std::invalid_argument("kron_identity_ones: K and n must be >= 1");
    Matrix y(K, K * n);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < n; ++j) y(k, k * n + j) = 1.0;
    return y;
}

}  // namespace dlnlab
