#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dlnlab/dataset.hpp"
#include "dlnlab/network.hpp"

namespace dlnlab {

// Per-layer feature statistics; layer 0 is the input itself.
struct LayerMetrics {
    std::size_t layer = 0;
    double tr_sigma_w = 0.0;  // within-class scatter trace
    double tr_sigma_b = 0.0;  // between-class scatter trace
    double C = 0.0;           // tr_sigma_w / tr_sigma_b
    double D = 0.0;           // 1 - max pairwise cosine of class means
    std::size_t num_rank = 0;
};

// Scatter traces of a class-ordered feature matrix (columns grouped by class,
// n per class). Computed from squared column norms; the d x d scatter
// matrices are never materialized.
std::pair<double, double> scatter_traces(const Matrix& Z, std::size_t K, std::size_t n);

// tr_w / tr_b; throws when the class means coincide (tr_b ~ 0).
double compression(const Matrix& Z, std::size_t K, std::size_t n);

// 1 - max_{k != k'} cos(mu_k, mu_k'); throws when some class mean is ~ 0.
double discrimination(const Matrix& Z, std::size_t K, std::size_t n);

// (1/2) min_{k != k'} || mu_k/||mu_k|| - mu_k'/||mu_k'|| ||^2; algebraically
// equal to discrimination(), kept as its independent oracle.
double discrimination_via_distance(const Matrix& Z, std::size_t K, std::size_t n);

// Smallest m with sum of the m leading singular values strictly above 95% of
// the nuclear norm. Throws on the zero matrix.
std::size_t numerical_rank(const Matrix& A);

// Metrics for layers 0..L-1 (layer 0 evaluated on the raw input).
std::vector<LayerMetrics> layer_sweep(const Network& net, const Dataset& ds);

// CSV with header layer,tr_sigma_w,tr_sigma_b,C,log10_C,D,num_rank.
void write_metrics_csv(const std::vector<LayerMetrics>& rows, const std::string& path);

}  // namespace dlnlab
