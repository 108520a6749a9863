#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dlnlab/dataset.hpp"
#include "dlnlab/network.hpp"

namespace dlnlab {

// Measured analogues of the trained-weight assumptions.
struct AssumptionParams {
    double delta_hat = 0.0;        // balancedness residual of the last pair
    double eps_hat = 0.0;          // max middle singular value over hidden layers
    double rho_hat = 0.0;          // eps_hat minus the min over the same band
    double theta_hat = 0.0;        // data orthonormality constant
    double interior_bal_max = 0.0; // max residual over pairs 1..L-2
};

struct ConditionMargin {
    std::string name;
    double value = 0.0;  // measured quantity
    double limit = 0.0;  // admissible bound
    bool ok = false;     // value <= limit (strict < for the theta condition)
};

struct HypothesisReport {
    bool ok = false;
    std::vector<ConditionMargin> conditions;
};

// Closed-form constants and the per-layer compression-ratio envelope.
struct TheoryBounds {
    double c1 = 0.0;
    double c2 = 0.0;
    double ratio_lower_first = 0.0;  // interval for C_1/C_0
    double ratio_upper_first = 0.0;
    double ratio_lower = 0.0;        // interval for C_{l+1}/C_l, interior l
    double ratio_upper = 0.0;
    std::vector<double> d_lower;     // discrimination lower bound at l = 1..L-1
};

struct AssumptionReport {
    AssumptionParams params;
    double min_norm_residual = 0.0;
    double avg_balancedness = 0.0;
    double sv_variance = 0.0;
    HypothesisReport hypothesis;
    std::vector<SpectrumCheck> spectra;
    bool spectra_ok = false;
};

// Measures (delta, eps, rho, theta, interior balancedness) from a trained
// Linear network; the middle singular-value band is i in [K+1, d-K].
// Requires d > 2K.
AssumptionParams extract_params(const Network& net, const Dataset& ds);

// The three trained-weight residuals: distance of the end-to-end map from the
// least-norm interpolator, mean balancedness residual, and the variance of
// the middle singular values across hidden layers.
struct ResidualMetrics {
    double min_norm = 0.0;
    double avg_bal = 0.0;
    double sv_var = 0.0;
};
ResidualMetrics residual_metrics(const Network& net, const Dataset& ds);

// Admissibility of (delta, eps, rho, theta) for the quantitative bounds.
HypothesisReport hypothesis_check(const AssumptionParams& p, std::size_t n, std::size_t K,
                                  std::size_t L);

// c1 = ((n-3)K - 1) / ((n-1)K + 1)
// c2 = (1 + n^{-1/L}) / ((1 - eps^{2(L-1)}/n)(1 - n^{-1/2}))
std::pair<double, double> constants(std::size_t n, std::size_t K, std::size_t L, double eps);

// Envelope for C_1/C_0 and C_{l+1}/C_l from the constants above. d_lower is
// left empty; fill it with discrimination_bound if needed.
TheoryBounds compression_bounds(std::size_t n, std::size_t K, std::size_t L, double eps);

// Explicit lower bound on D_l:
//   1 - 32(theta + 4 delta)(2 - (l+1)/L)
//     - 144 sqrt(delta) K^{1/4} n^{-1/(2L)}
//     - 32 n^{-l/L} (1 + theta/K) eps^{2l}
// May be negative (vacuous); returned as-is.
double discrimination_bound(double theta, double delta, double eps, std::size_t n,
                            std::size_t K, std::size_t L, std::size_t l);

// Weight-side spectral checks: singular-value bands of the end-to-end map,
// of every layer, and the refined bands using the measured (theta, delta).
std::vector<SpectrumCheck> audit_spectra(const Network& net, const Dataset& ds);

// One JSON object per inequality: {"name", "lhs", "rhs", "pass", "margin"}.
std::string checks_to_json(const std::vector<SpectrumCheck>& checks);

}  // namespace dlnlab
