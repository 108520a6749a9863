#pragma once

#include <stdexcept>
#include <vector>

#include "dlnlab/matrix.hpp"

namespace dlnlab {

// Thin SVD A = U diag(S) V^T with r = min(rows, cols), S sorted descending.
struct SvdResult {
    Matrix U;               // m x r, orthonormal columns
    std::vector<double> S;  // r, non-negative, non-increasing
    Matrix V;               // n x r, orthonormal columns
};

struct DecompositionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One-sided Jacobi. Throws DecompositionError (naming the shape) if the sweep
// cap is hit before the off-diagonal couplings fall under tolerance.
SvdResult svd(const Matrix& a);

std::vector<double> singular_values(const Matrix& a);
double spectral_norm(const Matrix& a);

// Reconstruction U diag(S) V^T, mostly for tests.
Matrix svd_reconstruct(const SvdResult& r);

}  // namespace dlnlab
