#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dlnlab {

// Dense real matrix, row-major, double precision throughout.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::string shape_str() const;

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }
};

// Thrown on incompatible shapes; the message carries both shapes.
void check_same_shape(const Matrix& a, const Matrix& b, const char* op);

// C = A * B. The default entry point runs the OpenMP kernel; the _serial
// variant is the reference implementation kept for testing and benchmarks.
// Both compute each output entry with the identical summation order, so
// results are bit-equal regardless of thread count.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_serial(const Matrix& a, const Matrix& b);

// C = A^T * B and C = A * B^T without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// In-place kernels over preallocated outputs (training hot path).
void matmul_into(Matrix& c, const Matrix& a, const Matrix& b);
void matmul_tn_into(Matrix& c, const Matrix& a, const Matrix& b);
void matmul_nt_into(Matrix& c, const Matrix& a, const Matrix& b);

// Serial counterparts of the in-place kernels.
void matmul_into_serial(Matrix& c, const Matrix& a, const Matrix& b);
void matmul_tn_into_serial(Matrix& c, const Matrix& a, const Matrix& b);
void matmul_nt_into_serial(Matrix& c, const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double t, const Matrix& a);

double frob_norm(const Matrix& a);
double frob_norm_sq(const Matrix& a);
bool all_finite(const Matrix& a);

// K x (K*n) block indicator: row k is one on the columns of class k.
Matrix kron_identity_ones(std::size_t K, std::size_t n);

}  // namespace dlnlab
