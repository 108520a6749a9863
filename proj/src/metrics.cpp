#include "dlnlab/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dlnlab/io_util.hpp"
#include "dlnlab/svd.hpp"

namespace dlnlab {

namespace {

constexpr double kDegenerate = 1e-30;

void check_layout(const Matrix& Z, std::size_t K, std::size_t n, const char* op) {
    if (K < 1 || n < 1 || Z.cols != K * n) {
        std::ostringstream os;
        os << op << ": feature matrix has " << Z.cols << " columns, expected K*n = " << K * n;
        throw std::invalid_argument(os.str());
    }
}

// Column k = class-k mean of Z.
Matrix class_means(const Matrix& Z, std::size_t K, std::size_t n) {
    Matrix mu(Z.rows, K);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < Z.rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += Z(i, k * n + j);
            mu(i, k) = s * inv;
        }
    return mu;
}

}  // namespace

std::pair<double, double> scatter_traces(const Matrix& Z, std::size_t K, std::size_t n) {
    check_layout(Z, K, n, "scatter_traces");
    const std::size_t N = K * n;
    const Matrix mu = class_means(Z, K, n);

    double tr_w = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < Z.rows; ++i) {
                const double dev = Z(i, k * n + j) - mu(i, k);
                tr_w += dev * dev;
            }
    tr_w /= static_cast<double>(N);

    double tr_b = 0.0;
    const double invk = 1.0 / static_cast<double>(K);
    for (std::size_t i = 0; i < Z.rows; ++i) {
        double g = 0.0;
        for (std::size_t k = 0; k < K; ++k) g += mu(i, k);
        g *= invk;
        for (std::size_t k = 0; k < K; ++k) {
            const double dev = mu(i, k) - g;
            tr_b += dev * dev;
        }
    }
    tr_b *= static_cast<double>(n) / static_cast<double>(N);
    return {tr_w, tr_b};
}

double compression(const Matrix& Z, std::size_t K, std::size_t n) {
    const auto [tr_w, tr_b] = scatter_traces(Z, K, n);
    if (tr_b <= kDegenerate)
        throw std::domain_error("compression: between-class scatter is degenerate "
                                "(all class means coincide)");
    return tr_w / tr_b;
}

double discrimination(const Matrix& Z, std::size_t K, std::size_t n) {
    check_layout(Z, K, n, "discrimination");
    const Matrix mu = class_means(Z, K, n);
    std::vector<double> norms(K);
    for (std::size_t k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < Z.rows; ++i) s += mu(i, k) * mu(i, k);
        norms[k] = std::sqrt(s);
        if (norms[k] <= kDegenerate)
            throw std::domain_error("discrimination: class mean has (near) zero norm");
    }
    double max_cos = -2.0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t kp = k + 1; kp < K; ++kp) {
            double dot = 0.0;
            for (std::size_t i = 0; i < Z.rows; ++i) dot += mu(i, k) * mu(i, kp);
            max_cos = std::max(max_cos, dot / (norms[k] * norms[kp]));
        }
    return 1.0 - max_cos;
}

double discrimination_via_distance(const Matrix& Z, std::size_t K, std::size_t n) {
    check_layout(Z, K, n, "discrimination_via_distance");
    const Matrix mu = class_means(Z, K, n);
    std::vector<double> norms(K);
    for (std::size_t k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < Z.rows; ++i) s += mu(i, k) * mu(i, k);
        norms[k] = std::sqrt(s);
        if (norms[k] <= kDegenerate)
            throw std::domain_error("discrimination_via_distance: class mean has (near) zero norm");
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t kp = k + 1; kp < K; ++kp) {
            double s = 0.0;
            for (std::size_t i = 0; i < Z.rows; ++i) {
                const double dev = mu(i, k) / norms[k] - mu(i, kp) / norms[kp];
                s += dev * dev;
            }
            min_dist = std::min(min_dist, s);
        }
    return 0.5 * min_dist;
}

std::size_t numerical_rank(const Matrix& A) {
    const std::vector<double> sv = singular_values(A);
    double nuclear = 0.0;
    for (double s : sv) nuclear += s;
    if (nuclear <= 0.0) throw std::domain_error("numerical_rank: zero matrix");
    const double target = 0.95 * nuclear;
    double acc = 0.0;
    for (std::size_t m = 0; m < sv.size(); ++m) {
        acc += sv[m];
        if (acc > target) return m + 1;  // strictly more than 95%
    }
    return sv.size();
}

std::vector<LayerMetrics> layer_sweep(const Network& net, const Dataset& ds) {
    std::vector<LayerMetrics> rows;
    rows.reserve(net.arch.L);
    auto eval = [&](std::size_t layer, const Matrix& Z) {
        LayerMetrics m;
        m.layer = layer;
        const auto [tw, tb] = scatter_traces(Z, ds.K, ds.n);
        m.tr_sigma_w = tw;
        m.tr_sigma_b = tb;
        m.C = compression(Z, ds.K, ds.n);
        m.D = discrimination(Z, ds.K, ds.n);
        m.num_rank = numerical_rank(Z);
        rows.push_back(m);
    };
    eval(0, ds.X);
    const std::vector<Matrix> zs = features(net, ds.X);
    for (std::size_t l = 0; l < zs.size(); ++l) eval(l + 1, zs[l]);
    return rows;
}

void write_metrics_csv(const std::vector<LayerMetrics>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    os << "layer,tr_sigma_w,tr_sigma_b,C,log10_C,D,num_rank\n";
    for (const LayerMetrics& m : rows) {
        os << m.layer << ',' << fmt_double(m.tr_sigma_w) << ',' << fmt_double(m.tr_sigma_b)
           << ',' << fmt_double(m.C) << ',' << fmt_double(std::log10(m.C)) << ','
           << fmt_double(m.D) << ',' << m.num_rank << "\n";
    }
    if (!os) throw std::runtime_error("write_metrics_csv: write failed for " + path);
}

}  // namespace dlnlab
