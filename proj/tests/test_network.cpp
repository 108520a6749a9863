#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dlnlab/network.hpp"
#include "dlnlab/rng.hpp"
#include "dlnlab/svd.hpp"
#include "dlnlab/training.hpp"

using namespace dlnlab;

TEST_CASE("architecture validation") {
    CHECK_THROWS_AS(Architecture(1, 10, 3), std::invalid_argument);
    CHECK_THROWS_AS(Architecture(3, 2, 3), std::invalid_argument);
    CHECK_NOTHROW(Architecture(2, 10, 3));
}

TEST_CASE("orthogonal initialization structure") {
    const double xi = 0.3;
    const Architecture arch(4, 20, 3);
    const Network net = init_orthogonal(arch, xi, 5);

    for (std::size_t l = 0; l + 1 < arch.L; ++l) {
        Matrix want = Matrix::identity(20);
        for (double& v : want.data) v *= xi * xi;
        CHECK(frob_norm(matmul_tn(net.weights[l], net.weights[l]) - want) <=
              1e-9 * xi * xi * 20);
    }
    const std::vector<double> sv = singular_values(net.weights.back());
    for (std::size_t i = 0; i < arch.K; ++i) CHECK(std::abs(sv[i] - xi) <= 1e-9);

    const Network again = init_orthogonal(arch, xi, 5);
    for (std::size_t l = 0; l < arch.L; ++l)
        CHECK(net.weights[l].data == again.weights[l].data);
}

TEST_CASE("uniform kaiming initialization stays in its box") {
    const Architecture arch(3, 16, 2);
    const Network net = init_uniform_kaiming(arch, 3);
    const double bound = 1.0 / std::sqrt(16.0);
    for (const Matrix& w : net.weights)
        for (double v : w.data) {
            CHECK(v >= -bound);
            CHECK(v <= bound);
        }
    const Network again = init_uniform_kaiming(arch, 3);
    CHECK(net.weights[0].data == again.weights[0].data);
}

TEST_CASE("forward truncates through an identity chain") {
    const Architecture arch(2, 4, 2);
    Network net{arch, {}};
    net.weights.push_back(Matrix::identity(4));
    Matrix w2(2, 4);
    w2(0, 0) = 1.0;
    w2(1, 1) = 1.0;
    net.weights.push_back(w2);
    Matrix e1(4, 1);
    e1(0, 0) = 1.0;
    const Matrix out = forward(net, e1);
    CHECK(out(0, 0) == 1.0);
    CHECK(out(1, 0) == 0.0);
}

TEST_CASE("forward equals the end-to-end product for linear nets") {
    const Architecture arch(4, 12, 3);
    const Network net = init_orthogonal(arch, 0.5, 7);
    Rng rng(8);
    const Matrix x = gaussian_matrix(12, 6, rng);
    const Matrix a = forward(net, x);
    const Matrix b = matmul(end_to_end(net), x);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-9));
}

TEST_CASE("relu forward matches linear when nothing clips") {
    Architecture relu_arch(3, 5, 2, Activation::ReLU);
    Architecture lin_arch(3, 5, 2, Activation::Linear);
    Rng rng(9);
    Network relu_net{relu_arch, {}};
    relu_net.weights.push_back(uniform_matrix(5, 5, rng, 0.0, 1.0));
    relu_net.weights.push_back(uniform_matrix(5, 5, rng, 0.0, 1.0));
    relu_net.weights.push_back(uniform_matrix(2, 5, rng, 0.0, 1.0));
    Network lin_net{lin_arch, relu_net.weights};

    const Matrix x = uniform_matrix(5, 4, rng, 0.0, 1.0);
    const Matrix a = forward(relu_net, x);
    const Matrix b = forward(lin_net, x);
    CHECK(a.data == b.data);
}

TEST_CASE("features chain consistently") {
    const Architecture arch(4, 10, 3);
    const Network net = init_orthogonal(arch, 0.4, 11);
    Rng rng(12);
    const Matrix x = gaussian_matrix(10, 5, rng);
    const std::vector<Matrix> zs = features(net, x);
    REQUIRE(zs.size() == arch.L - 1);

    const Matrix z1 = matmul(net.weights[0], x);
    CHECK(zs[0].data == z1.data);

    const Matrix out = matmul(net.weights.back(), zs.back());
    const Matrix fwd = forward(net, x);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        CHECK(out.data[i] == doctest::Approx(fwd.data[i]).epsilon(1e-12));
}

TEST_CASE("relu features are non-negative") {
    const Architecture arch(4, 10, 3, Activation::ReLU);
    const Network net = init_orthogonal(arch, 0.4, 13);
    Rng rng(14);
    const Matrix x = gaussian_matrix(10, 5, rng);
    for (const Matrix& z : features(net, x))
        for (double v : z.data) CHECK(v >= 0.0);
}

TEST_CASE("end_to_end") {
    SUBCASE("two layers multiply") {
        const Architecture arch(2, 6, 2);
        const Network net = init_orthogonal(arch, 0.7, 15);
        const Matrix prod = matmul(net.weights[1], net.weights[0]);
        CHECK(end_to_end(net).data == prod.data);
    }
    SUBCASE("orthogonal init has xi^L spectrum") {
        const double xi = 0.5;
        const Architecture arch(5, 14, 3);
        const Network net = init_orthogonal(arch, xi, 16);
        const std::vector<double> sv = singular_values(end_to_end(net));
        for (std::size_t i = 0; i < arch.K; ++i)
            CHECK(std::abs(sv[i] - std::pow(xi, 5)) <= 1e-8);
    }
    SUBCASE("rejected for relu nets") {
        const Architecture arch(3, 8, 2, Activation::ReLU);
        const Network net = init_orthogonal(arch, 0.3, 17);
        CHECK_THROWS_AS(end_to_end(net), std::logic_error);
    }
}

TEST_CASE("balancedness of a fresh orthogonal init") {
    const double xi = 0.3;
    const std::size_t d = 50, K = 3;
    const Architecture arch(6, d, K);
    const Network net = init_orthogonal(arch, xi, 19);
    const std::vector<double> res = balancedness_residuals(net);
    REQUIRE(res.size() == 5);
    for (std::size_t l = 0; l + 1 < res.size(); ++l) CHECK(res[l] <= 1e-9);
    const double want = xi * xi * std::sqrt(static_cast<double>(d - K));
    CHECK(res.back() == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("network checkpoint round trip") {
    const Architecture arch(3, 9, 2, Activation::ReLU);
    const Network net = init_orthogonal(arch, 0.2, 23);
    const std::string path = std::filesystem::temp_directory_path() / "dlnlab_net_test.bin";
    save_network(net, path);
    const Network back = load_network(path);
    CHECK(back.arch.L == 3);
    CHECK(back.arch.activation == Activation::ReLU);
    for (std::size_t l = 0; l < net.weights.size(); ++l)
        CHECK(back.weights[l].data == net.weights[l].data);
    std::remove(path.c_str());
}
