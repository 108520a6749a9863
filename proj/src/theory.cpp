#include "dlnlab/theory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dlnlab/io_util.hpp"
#include "dlnlab/svd.hpp"
#include "dlnlab/training.hpp"

namespace dlnlab {

namespace {

void require_linear(const Network& net, const char* op) {
    if (net.arch.activation != Activation::Linear)
        throw std::logic_error(std::string(op) + ": only defined for Linear networks");
}

// Middle singular values sigma_i(W_l), i in [K+1, d-K], for l in [L-1].
std::vector<double> middle_band(const Network& net) {
    const std::size_t K = net.arch.K;
    const std::size_t d = net.arch.hidden;
    std::vector<double> band;
    band.reserve((net.arch.L - 1) * (d - 2 * K));
    for (std::size_t l = 0; l + 1 < net.arch.L; ++l) {
        const std::vector<double> sv = singular_values(net.weights[l]);
        for (std::size_t i = K; i < d - K; ++i) band.push_back(sv[i]);
    }
    return band;
}

}  // namespace

AssumptionParams extract_params(const Network& net, const Dataset& ds) {
    require_linear(net, "extract_params");
    if (net.arch.hidden <= 2 * net.arch.K)
        throw std::invalid_argument("extract_params: audit needs d > 2K");
    AssumptionParams p;
    const std::vector<double> res = balancedness_residuals(net);
    p.delta_hat = res.back();
    for (std::size_t l = 0; l + 1 < res.size(); ++l)
        p.interior_bal_max = std::max(p.interior_bal_max, res[l]);
    const std::vector<double> band = middle_band(net);
    double lo = band[0], hi = band[0];
    for (double s : band) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    p.eps_hat = hi;
    p.rho_hat = hi - lo;
    p.theta_hat = measure_theta(ds).theta_hat;
    return p;
}

ResidualMetrics residual_metrics(const Network& net, const Dataset& ds) {
    require_linear(net, "residual_metrics");
    if (net.arch.hidden <= 2 * net.arch.K)
        throw std::invalid_argument("residual_metrics: audit needs d > 2K");

    // Least-norm interpolator Y (X^T X)^{-1} X^T via the SVD of X.
    const SvdResult sx = svd(ds.X);
    const double smin = sx.S.back();
    if (smin <= 1e-12 * sx.S.front() || smin == 0.0)
        throw std::domain_error("residual_metrics: X^T X is numerically singular");
    Matrix yv = matmul(ds.Y, sx.V);  // K x N
    for (std::size_t j = 0; j < yv.cols; ++j)
        for (std::size_t i = 0; i < yv.rows; ++i) yv(i, j) /= sx.S[j];
    const Matrix least_norm = matmul_nt(yv, sx.U);  // K x d

    ResidualMetrics r;
    r.min_norm = frob_norm(least_norm - end_to_end(net));

    const std::vector<double> res = balancedness_residuals(net);
    double s = 0.0;
    for (double v : res) s += v;
    r.avg_bal = s / static_cast<double>(res.size());

    const std::vector<double> band = middle_band(net);
    double mean = 0.0;
    for (double v : band) mean += v;
    mean /= static_cast<double>(band.size());
    double var = 0.0;
    for (double v : band) var += (v - mean) * (v - mean);
    r.sv_var = var / static_cast<double>(band.size());
    return r;
}

HypothesisReport hypothesis_check(const AssumptionParams& p, std::size_t n, std::size_t K,
                                  std::size_t L) {
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(K);
    const double ld = static_cast<double>(L);
    HypothesisReport rep;
    auto add = [&rep](const std::string& name, double value, double limit, bool strict) {
        const bool ok = strict ? value < limit : value <= limit;
        rep.conditions.push_back({name, value, limit, ok});
    };
    const double delta_limit = std::min({std::pow(2.0 * nd, 1.0 / ld) / (30.0 * ld * ld),
                                         std::pow(nd, 1.0 / ld) / (128.0 * std::sqrt(kd)),
                                         1.0 / (16.0 * std::sqrt(kd))});
    add("delta", p.delta_hat, delta_limit, false);
    add("eps", p.eps_hat, std::min(std::pow(nd, 1.0 / (2.0 * ld)) / 4.0, 1.0), false);
    add("rho", p.rho_hat, p.eps_hat / (2.0 * ld * std::sqrt(nd)), false);
    add("theta", p.theta_hat, 0.25, true);
    rep.ok = true;
    for (const ConditionMargin& c : rep.conditions) rep.ok = rep.ok && c.ok;
    return rep;
}

std::pair<double, double> constants(std::size_t n, std::size_t K, std::size_t L, double eps) {
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(K);
    const double ld = static_cast<double>(L);
    const double c1_num = (nd - 3.0) * kd - 1.0;
    if (c1_num <= 0.0)
        throw std::domain_error("constants: need (n-3)K > 1 for a positive c1");
    const double eps_pow = std::pow(eps, 2.0 * (ld - 1.0));
    if (eps_pow >= nd)
        throw std::domain_error("constants: need eps^{2(L-1)} < n");
    const double c1 = c1_num / ((nd - 1.0) * kd + 1.0);
    const double c2 = (1.0 + std::pow(nd, -1.0 / ld)) /
                      ((1.0 - eps_pow / nd) * (1.0 - 1.0 / std::sqrt(nd)));
    return {c1, c2};
}

TheoryBounds compression_bounds(std::size_t n, std::size_t K, std::size_t L, double eps) {
    const auto [c1, c2] = constants(n, K, L, eps);
    const double nd = static_cast<double>(n);
    const double ld = static_cast<double>(L);
    const double two_n = std::pow(2.0 * nd, 1.0 / ld);
    const double half_n = std::pow(nd / 2.0, 1.0 / ld);
    const double inv_n = std::pow(nd, -1.0 / ld);
    const double e2 = eps * eps;

    TheoryBounds b;
    b.c1 = c1;
    b.c2 = c2;
    b.ratio_lower_first = c1 * e2 / (c2 * (two_n + e2));
    b.ratio_upper_first = 2.0 * c2 * e2 / (c1 * half_n);
    b.ratio_lower = c1 * e2 / (c2 * (two_n + inv_n));
    b.ratio_upper = c2 * (1.0 + inv_n) * e2 / (c1 * half_n);
    return b;
}

double discrimination_bound(double theta, double delta, double eps, std::size_t n,
                            std::size_t K, std::size_t L, std::size_t l) {
    if (l < 1 || l > L - 1)
        throw std::invalid_argument("discrimination_bound: l must be in [1, L-1]");
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(K);
    const double ld = static_cast<double>(L);
    const double lf = static_cast<double>(l);
    const double term_bal = 32.0 * (theta + 4.0 * delta) * (2.0 - (lf + 1.0) / ld);
    const double term_delta =
        144.0 * std::sqrt(delta) * std::pow(kd, 0.25) * std::pow(nd, -1.0 / (2.0 * ld));
    const double term_eps =
        32.0 * std::pow(nd, -lf / ld) * (1.0 + theta / kd) * std::pow(eps, 2.0 * lf);
    return 1.0 - term_bal - term_delta - term_eps;
}

std::vector<SpectrumCheck> audit_spectra(const Network& net, const Dataset& ds) {
    require_linear(net, "audit_spectra");
    const std::size_t L = net.arch.L;
    const std::size_t K = net.arch.K;
    const double nd = static_cast<double>(ds.n);
    const double ld = static_cast<double>(L);
    const AssumptionParams p = extract_params(net, ds);
    const double theta = p.theta_hat;
    const double delta = p.delta_hat;

    std::vector<SpectrumCheck> checks;
    // Measured spectra of a net trained to loss < tol carry a residue of
    // order sqrt(2 tol); the comparison allows that much slack so a run that
    // satisfies the inequality exactly at its limit still passes. Genuine
    // violations are orders of magnitude larger.
    auto push = [&checks](const std::string& name, double lhs, double rhs) {
        const double slack = 1e-5 * std::max(1.0, std::abs(rhs));
        checks.push_back({name, lhs, rhs, lhs <= rhs + slack, rhs - lhs});
    };
    // Bounds whose formula leaves the real domain (a negative base under a
    // fractional power) are vacuous: lower bounds become 0, upper bounds inf.
    auto pow_or = [](double base, double e, double fallback) {
        return base > 0.0 ? std::pow(base, e) : fallback;
    };
    const double inf = std::numeric_limits<double>::infinity();

    const std::vector<double> sv_prod = singular_values(end_to_end(net));
    push("end_to_end_sigmaK_lower", pow_or(1.0 + theta, -0.5, 0.0) * std::sqrt(nd),
         sv_prod[K - 1]);
    push("end_to_end_sigma1_upper", sv_prod[0],
         theta < 1.0 ? std::sqrt(nd / (1.0 - theta)) : inf);

    const double wl_lo = std::pow(nd / 2.0, 1.0 / (2.0 * ld));
    const double wl_hi = std::pow(2.0 * std::sqrt(nd), 1.0 / ld);
    const double band_lo = pow_or((1.0 / (1.0 + theta) - 4.0 * delta) * nd, 1.0 / (2.0 * ld), 0.0);
    const double band_hi = (theta < 1.0 && 1.0 / (1.0 - theta) + 4.0 * delta > 0.0)
                               ? std::pow((1.0 / (1.0 - theta) + 4.0 * delta) * nd,
                                          1.0 / (2.0 * ld))
                               : inf;
    for (std::size_t l = 0; l < L; ++l) {
        const std::vector<double> sv = singular_values(net.weights[l]);
        const std::string tag = "W" + std::to_string(l + 1);
        push(tag + "_sigmaK_lower", wl_lo, sv[K - 1]);
        push(tag + "_sigma1_upper", sv[0], wl_hi);
        if (l + 1 < L) {
            push(tag + "_band_lower", band_lo, sv[K - 1]);
            push(tag + "_band_upper", sv[0], band_hi);
        } else {
            const double slack = std::sqrt(delta);
            push(tag + "_band_lower", std::max(band_lo - slack, 0.0), sv[K - 1]);
            push(tag + "_band_upper", sv[0], band_hi + slack);
        }
    }
    return checks;
}

std::string checks_to_json(const std::vector<SpectrumCheck>& checks) {
    // Non-finite bounds (vacuous checks) have no JSON number form; emit null.
    auto num = [](double v) { return std::isfinite(v) ? fmt_double(v) : std::string("null"); };
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const SpectrumCheck& c = checks[i];
        if (i) os << ",";
        os << "\n  {\"name\": \"" << c.name << "\", \"lhs\": " << num(c.lhs)
           << ", \"rhs\": " << num(c.rhs) << ", \"pass\": " << (c.pass ? "true" : "false")
           << ", \"margin\": " << num(c.margin) << "}";
    }
    os << "\n]";
    return os.str();
}

}  // namespace dlnlab
