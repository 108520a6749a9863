#include "dlnlab/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dlnlab/rng.hpp"

namespace dlnlab {

namespace {

constexpr char kMagic[8] = {'D', 'L', 'N', 'N', 'E', 'T', '0', '1'};

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

void relu_inplace(Matrix& m) {
    for (double& v : m.data)
        if (v < 0.0) v = 0.0;
}

}  // namespace

Architecture::Architecture(std::size_t layers, std::size_t d, std::size_t classes,
                           Activation act)
    : L(layers), d_in(d), hidden(d), K(classes), activation(act) {
    if (L < 2) throw std::invalid_argument("Architecture: L must be >= 2");
    if (d < 1 || classes < 1) throw std::invalid_argument("Architecture: d and K must be >= 1");
    if (classes > d)
        throw std::invalid_argument("Architecture: K must not exceed the hidden width d");
}

Network init_orthogonal(const Architecture& arch, double xi, std::uint64_t seed) {
    if (!(xi > 0.0)) throw std::invalid_argument("init_orthogonal: xi must be > 0");
    Rng rng(seed);
    Network net{arch, {}};
    net.weights.reserve(arch.L);
    for (std::size_t l = 0; l + 1 < arch.L; ++l) {
        Matrix q = haar_orthogonal(arch.hidden, rng);
        for (double& v : q.data) v *= xi;
        net.weights.push_back(std::move(q));
    }
    Matrix u = haar_orthogonal(arch.K, rng);
    Matrix wl(arch.K, arch.hidden);
    for (std::size_t i = 0; i < arch.K; ++i)
        for (std::size_t j = 0; j < arch.K; ++j) wl(i, j) = xi * u(i, j);
    net.weights.push_back(std::move(wl));
    return net;
}

Network init_uniform_kaiming(const Architecture& arch, std::uint64_t seed) {
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(arch.hidden));
    Network net{arch, {}};
    net.weights.reserve(arch.L);
    for (std::size_t l = 0; l + 1 < arch.L; ++l)
        net.weights.push_back(uniform_matrix(arch.hidden, arch.hidden, rng, -bound, bound));
    net.weights.push_back(uniform_matrix(arch.K, arch.hidden, rng, -bound, bound));
    return net;
}

Matrix forward(const Network& net, const Matrix& X) {
    if (X.rows != net.arch.d_in) {
        std::ostringstream os;
        os << "forward: input has " << X.rows << " rows, network expects " << net.arch.d_in;
        throw std::invalid_argument(os.str());
    }
    Matrix z = X;
    for (std::size_t l = 0; l < net.arch.L; ++l) {
        z = matmul(net.weights[l], z);
        if (net.arch.activation == Activation::ReLU && l + 1 < net.arch.L) relu_inplace(z);
    }
    return z;
}

std::vector<Matrix> features(const Network& net, const Matrix& X) {
    if (X.rows != net.arch.d_in) {
        std::ostringstream os;
        os << "features: input has " << X.rows << " rows, network expects " << net.arch.d_in;
        throw std::invalid_argument(os.str());
    }
    std::vector<Matrix> zs;
    zs.reserve(net.arch.L - 1);
    const Matrix* prev = &X;
    for (std::size_t l = 0; l + 1 < net.arch.L; ++l) {
        Matrix z = matmul(net.weights[l], *prev);
        if (net.arch.activation == Activation::ReLU) relu_inplace(z);
        zs.push_back(std::move(z));
        prev = &zs.back();
    }
    return zs;
}

Matrix end_to_end(const Network& net) {
    if (net.arch.activation != Activation::Linear)
        throw std::logic_error("end_to_end: only defined for Linear networks");
    Matrix p = net.weights[0];
    for (std::size_t l = 1; l < net.arch.L; ++l) p = matmul(net.weights[l], p);
    return p;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_network: cannot open " + path);
    os.write(kMagic, 8);
    write_u64(os, net.arch.L);
    write_u64(os, net.arch.hidden);
    write_u64(os, net.arch.K);
    write_u64(os, net.arch.activation == Activation::ReLU ? 1 : 0);
    for (const Matrix& w : net.weights)
        for (std::size_t j = 0; j < w.cols; ++j)
            for (std::size_t i = 0; i < w.rows; ++i) write_f64(os, w(i, j));
    if (!os) throw std::runtime_error("save_network: write failed for " + path);
}

Network load_network(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_network: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_network: bad magic in " + path);
    const std::uint64_t L = read_u64(is);
    const std::uint64_t d = read_u64(is);
    const std::uint64_t K = read_u64(is);
    const std::uint64_t act = read_u64(is);
    Architecture arch(L, d, K, act == 1 ? Activation::ReLU : Activation::Linear);
    Network net{arch, {}};
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t rows = (l + 1 < L) ? d : K;
        Matrix w(rows, d);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < rows; ++i) w(i, j) = read_f64(is);
        net.weights.push_back(std::move(w));
    }
    if (!is) throw std::runtime_error("load_network: truncated file " + path);
    return net;
}

}  // namespace dlnlab
