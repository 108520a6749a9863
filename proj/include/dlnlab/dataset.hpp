#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dlnlab/matrix.hpp"

namespace dlnlab {

// K-class training set, columns of X ordered class by class (sample i of
// class k sits in column (k-1)*n + i). Y is always the block indicator
// kron_identity_ones(K, n).
struct Dataset {
    Matrix X;        // d x N
    Matrix Y;        // K x N
    std::size_t K = 0, n = 0, d = 0, N = 0;
};

struct OrthogonalityAudit {
    double theta_hat = 0.0;     // N * max(norm deviation, cross inner product)
    double max_norm_dev = 0.0;  // max_i |  ||x_i||^2 - 1 |
    double max_inner = 0.0;     // max_{i != j} | <x_i, x_j> |
    bool compliant = false;     // theta_hat < 1/4 and d >= N
};

struct SpectrumCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    double margin = 0.0;  // rhs - lhs; the inequality asserted is lhs <= rhs
};

// Wrap an existing feature matrix (columns class-ordered) into a Dataset.
Dataset dataset_from_features(Matrix X, std::size_t K, std::size_t n);

// Synthetic nearly-orthonormal data: X0 = left singular factor of a Gaussian
// matrix, plus a uniform [0,1] noise matrix normalized to unit Frobenius norm.
// Deterministic per (d, K, n, seed). Requires d >= K*n.
Dataset generate(std::size_t d, std::size_t K, std::size_t n, std::uint64_t seed);

// Exactly orthonormal columns (first K*n columns of a Haar matrix); measures
// theta_hat ~ 0 and is used where a strictly compliant dataset is needed.
Dataset generate_orthonormal(std::size_t d, std::size_t K, std::size_t n, std::uint64_t seed);

OrthogonalityAudit measure_theta(const Dataset& ds);

// d x K, column k = mean of class k's samples.
Matrix class_mean_matrix(const Dataset& ds);

// DeltaW (d x N): x_{k,i} - xbar_k.  DeltaB (d x K): xbar_k - xbar.
std::pair<Matrix, Matrix> deviation_matrices(const Dataset& ds);

// Data-side spectral checks: singular-value band of X and the distance
// between X and the tiled class-mean matrix, each against its theta band.
std::vector<SpectrumCheck> audit_spectrum(const Dataset& ds);

// Flat binary format, magic "DLNDATA1"; see README for the layout.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace dlnlab
