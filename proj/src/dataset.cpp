#include "dlnlab/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dlnlab/rng.hpp"
#include "dlnlab/svd.hpp"

namespace dlnlab {

namespace {

constexpr char kMagic[8] = {'D', 'L', 'N', 'D', 'A', 'T', 'A', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    write_u64(os, v);
}

double read_f64(std::istream& is) {
    std::uint64_t v = read_u64(is);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace

Dataset dataset_from_features(Matrix X, std::size_t K, std::size_t n) {
    if (K < 1 || n < 1) throw std::invalid_argument("dataset: K and n must be >= 1");
    if (X.cols != K * n) {
        std::ostringstream os;
        os << "dataset: X has " << X.cols << " columns, expected K*n = " << K * n;
        throw std::invalid_argument(os.str());
    }
    Dataset ds;
    ds.K = K;
    ds.n = n;
    ds.d = X.rows;
    ds.N = K * n;
    ds.X = std::move(X);
    ds.Y = kron_identity_ones(K, n);
    return ds;
}

Dataset generate(std::size_t d, std::size_t K, std::size_t n, std::uint64_t seed) {
    const std::size_t N = K * n;
    if (d < N) {
        std::ostringstream os;
        os << "generate: need d >= K*n, got d=" << d << " K*n=" << N;
        throw std::invalid_argument(os.str());
    }
    Rng rng(seed);
    Matrix a = gaussian_matrix(d, N, rng);
    SvdResult sv = svd(a);
    Matrix x0 = std::move(sv.U);  // d x N, orthonormal columns

    // Sign-normalize each singular vector: largest-magnitude entry positive
    // (first index wins ties) so the output is seed-stable.
    for (std::size_t j = 0; j < x0.cols; ++j) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < x0.rows; ++i) {
            const double m = std::abs(x0(i, j));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        if (x0(arg, j) < 0.0)
            for (std::size_t i = 0; i < x0.rows; ++i) x0(i, j) = -x0(i, j);
    }

    Matrix b = uniform_matrix(d, N, rng);
    const double bn = frob_norm(b);
    for (double& v : b.data) v /= bn;

    return dataset_from_features(x0 + b, K, n);
}

Dataset generate_orthonormal(std::size_t d, std::size_t K, std::size_t n, std::uint64_t seed) {
    const std::size_t N = K * n;
    if (d < N) throw std::invalid_argument("generate_orthonormal: need d >= K*n");
    Matrix q = haar_orthogonal(d, seed);
    Matrix x(d, N);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < N; ++j) x(i, j) = q(i, j);
    return dataset_from_features(std::move(x), K, n);
}

OrthogonalityAudit measure_theta(const Dataset& ds) {
    const Matrix gram = matmul_tn(ds.X, ds.X);
    OrthogonalityAudit audit;
    for (std::size_t i = 0; i < ds.N; ++i) {
        audit.max_norm_dev = std::max(audit.max_norm_dev, std::abs(gram(i, i) - 1.0));
        for (std::size_t j = 0; j < ds.N; ++j) {
            if (i == j) continue;
            audit.max_inner = std::max(audit.max_inner, std::abs(gram(i, j)));
        }
    }
    audit.theta_hat =
        static_cast<double>(ds.N) * std::max(audit.max_norm_dev, audit.max_inner);
    audit.compliant = audit.theta_hat < 0.25 && ds.d >= ds.N;
    return audit;
}

Matrix class_mean_matrix(const Dataset& ds) {
    Matrix means(ds.d, ds.K);
    const double inv = 1.0 / static_cast<double>(ds.n);
    for (std::size_t k = 0; k < ds.K; ++k)
        for (std::size_t i = 0; i < ds.d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < ds.n; ++j) s += ds.X(i, k * ds.n + j);
            means(i, k) = s * inv;
        }
    return means;
}

std::pair<Matrix, Matrix> deviation_matrices(const Dataset& ds) {
    const Matrix means = class_mean_matrix(ds);
    Matrix dw(ds.d, ds.N);
    for (std::size_t k = 0; k < ds.K; ++k)
        for (std::size_t j = 0; j < ds.n; ++j)
            for (std::size_t i = 0; i < ds.d; ++i)
                dw(i, k * ds.n + j) = ds.X(i, k * ds.n + j) - means(i, k);
    Matrix db(ds.d, ds.K);
    const double invk = 1.0 / static_cast<double>(ds.K);
    for (std::size_t i = 0; i < ds.d; ++i) {
        double g = 0.0;
        for (std::size_t k = 0; k < ds.K; ++k) g += means(i, k);
        g *= invk;
        for (std::size_t k = 0; k < ds.K; ++k) db(i, k) = means(i, k) - g;
    }
    return {std::move(dw), std::move(db)};
}

std::vector<SpectrumCheck> audit_spectrum(const Dataset& ds) {
    const OrthogonalityAudit audit = measure_theta(ds);
    const double theta = audit.theta_hat;
    const double nn = static_cast<double>(ds.N);
    const double kk = static_cast<double>(ds.K);

    std::vector<double> sv = singular_values(ds.X);
    const double smin = sv.back();
    const double smax = sv.front();

    // Xbar: class means tiled n times.
    const Matrix means = class_mean_matrix(ds);
    Matrix xbar(ds.d, ds.N);
    for (std::size_t k = 0; k < ds.K; ++k)
        for (std::size_t j = 0; j < ds.n; ++j)
            for (std::size_t i = 0; i < ds.d; ++i) xbar(i, k * ds.n + j) = means(i, k);
    const Matrix diff = ds.X - xbar;
    const double diff_spec = spectral_norm(diff);
    const double diff_fro_sq = frob_norm_sq(diff);

    // A lower bound whose formula goes non-real (negative under the root) is
    // vacuous; it is recorded with lhs 0 so it always passes.
    auto lower = [](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; };

    std::vector<SpectrumCheck> checks;
    // Exactly orthonormal data sits exactly on the band edges; a rounding
    // allowance keeps those edge cases from flapping.
    auto push = [&checks](const std::string& name, double lhs, double rhs) {
        const double slack = 1e-12 * std::max(1.0, std::abs(rhs));
        checks.push_back({name, lhs, rhs, lhs <= rhs + slack, rhs - lhs});
    };
    push("sigma_min_X_lower", lower(1.0 - theta), smin);
    push("sigma_max_X_upper", smax, std::sqrt(1.0 + theta));
    push("X_minus_Xbar_spectral", diff_spec, std::sqrt(1.0 + 4.0 * theta));
    push("X_minus_Xbar_fro_sq_lower", nn - kk - 4.0 * theta, diff_fro_sq);
    push("X_minus_Xbar_fro_sq_upper", diff_fro_sq, nn - kk + 4.0 * theta);
    return checks;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
    os.write(kMagic, 8);
    write_u64(os, ds.d);
    write_u64(os, ds.N);
    write_u64(os, ds.K);
    write_u64(os, ds.n);
    for (std::size_t j = 0; j < ds.N; ++j)
        for (std::size_t i = 0; i < ds.d; ++i) write_f64(os, ds.X(i, j));
    if (!os) throw std::runtime_error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_dataset: bad magic in " + path);
    const std::uint64_t d = read_u64(is);
    const std::uint64_t N = read_u64(is);
    const std::uint64_t K = read_u64(is);
    const std::uint64_t n = read_u64(is);
    if (K * n != N) throw std::runtime_error("load_dataset: inconsistent header in " + path);
    Matrix x(d, N);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t i = 0; i < d; ++i) x(i, j) = read_f64(is);
    if (!is) throw std::runtime_error("load_dataset: truncated file " + path);
    return dataset_from_features(std::move(x), K, n);
}

}  // namespace dlnlab
