#include <doctest.h>

#include <cmath>

#include "dlnlab/dataset.hpp"
#include "dlnlab/rng.hpp"
#include "dlnlab/training.hpp"

using namespace dlnlab;

namespace {

// A 2-layer net computing exactly Y on a square orthonormal dataset:
// W_1 = X^T (so W_1 X = I), W_2 = Y.
Network exact_net(const Dataset& ds) {
    REQUIRE(ds.d == ds.N);
    const Architecture arch(2, ds.d, ds.K);
    Network net{arch, {}};
    net.weights.push_back(transpose(ds.X));
    net.weights.push_back(ds.Y);
    return net;
}

// Central finite differences of the loss, entry by entry.
double fd_gradient(Network net, const Dataset& ds, std::size_t layer, std::size_t idx,
                   double h) {
    const double orig = net.weights[layer].data[idx];
    net.weights[layer].data[idx] = orig + h;
    const double up = loss(net, ds);
    net.weights[layer].data[idx] = orig - h;
    const double dn = loss(net, ds);
    return (up - dn) / (2.0 * h);
}

}  // namespace

TEST_CASE("loss values") {
    const Dataset ds = generate_orthonormal(6, 2, 3, 31);
    Network net = exact_net(ds);
    CHECK(loss(net, ds) == doctest::Approx(0.0).epsilon(1e-18));

    // Perturb the output by E with ||E||_F = 2: loss becomes 0.5 * 4 = 2.
    Matrix e(ds.K, ds.d);
    e(0, 0) = 2.0;
    net.weights[1] = net.weights[1] + e;  // output becomes Y + E * (W_1 X) = Y + E
    CHECK(loss(net, ds) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gradients vanish at a zero-loss point") {
    const Dataset ds = generate_orthonormal(6, 2, 3, 33);
    const Network net = exact_net(ds);
    for (const Matrix& g : gradients(net, ds))
        CHECK(frob_norm(g) <= 1e-9 * frob_norm(ds.X));
}

TEST_CASE("analytic gradients match central differences") {
    const std::size_t d = 8, K = 2, n = 3;
    for (Activation act : {Activation::Linear, Activation::ReLU}) {
        const Dataset ds = generate(d, K, n, 35);
        const Architecture arch(3, d, K, act);
        const Network net = init_orthogonal(arch, 0.6, 36);
        const std::vector<Matrix> grads = gradients(net, ds);
        for (std::size_t l = 0; l < 3; ++l) {
            for (std::size_t idx = 0; idx < grads[l].data.size(); idx += 7) {
                const double g = grads[l].data[idx];
                const double fd = fd_gradient(net, ds, l, idx, 1e-6);
                const double scale = std::max({std::abs(g), std::abs(fd), 1e-6});
                INFO("activation ", act == Activation::ReLU ? "relu" : "linear", " layer ", l,
                     " idx ", idx);
                CHECK(std::abs(g - fd) / scale < 1e-5);
            }
        }
    }
}

TEST_CASE("train stops immediately at a solved point") {
    const Dataset ds = generate_orthonormal(6, 2, 3, 37);
    const Network net = exact_net(ds);
    const TrainResult r = train(net, ds, TrainConfig{});
    CHECK(r.converged);
    CHECK(r.iters == 0);
}

TEST_CASE("reference regime converges below tolerance") {
    const Dataset ds = generate(50, 3, 10, 42);
    const Architecture arch(6, 50, 3);
    const Network net = init_orthogonal(arch, 0.3, 42);
    const TrainResult r = train(net, ds, TrainConfig{});
    CHECK(r.converged);
    CHECK(r.final_loss < 1e-11);
    CHECK(r.iters > 100);

    SUBCASE("trained interior balancedness stays near-conserved") {
        // Discrete GD drifts the interior pairs by O(eta^2) per step; at
        // eta = 0.1 the accumulated drift lands around 1e-3, far below the
        // last-pair residual xi^2 sqrt(d-K) ~ 0.62.
        const std::vector<double> res = balancedness_residuals(r.net);
        for (std::size_t l = 0; l + 1 < res.size(); ++l) {
            CHECK(res[l] <= 1e-2);
            CHECK(res[l] <= 0.01 * res.back());
        }
    }
    SUBCASE("trajectory brackets the run") {
        REQUIRE(!r.trajectory.empty());
        CHECK(r.trajectory.front().step == 0);
        CHECK(r.trajectory.back().step == r.iters);
        CHECK(r.trajectory.back().loss == r.final_loss);
        for (const TrajectoryPoint& p : r.trajectory)
            CHECK(p.balancedness.size() == arch.L - 1);
    }
}

TEST_CASE("oversized learning rate raises a divergence error") {
    const Dataset ds = generate(50, 3, 10, 42);
    const Architecture arch(6, 50, 3);
    const Network net = init_orthogonal(arch, 0.3, 42);
    TrainConfig cfg;
    cfg.eta = 1000.0;
    cfg.max_iters = 200000;
    CHECK_THROWS_AS(train(net, ds, cfg), DivergenceError);
}

TEST_CASE("training is bit-deterministic") {
    const Dataset ds = generate(30, 3, 10, 44);
    const Architecture arch(4, 30, 3);
    const Network net = init_orthogonal(arch, 0.4, 44);
    TrainConfig cfg;
    cfg.max_iters = 500;
    cfg.tol = 1e-300;
    const TrainResult a = train(net, ds, cfg);
    const TrainResult b = train(net, ds, cfg);
    CHECK(a.final_loss == b.final_loss);
    CHECK(a.iters == b.iters);
    for (std::size_t l = 0; l < arch.L; ++l)
        CHECK(a.net.weights[l].data == b.net.weights[l].data);
}

// Interior balancedness drift is second order in the step size: halving eta
// must shrink the accumulated drift by a factor of at least 3 over 1000 steps.
TEST_CASE("balancedness drift scales quadratically with the step") {
    const Dataset ds = generate(50, 3, 10, 42);
    const Architecture arch(6, 50, 3);
    const Network net0 = init_orthogonal(arch, 0.3, 42);
    const std::vector<double> base = balancedness_residuals(net0);

    auto drift_at = [&](double eta) {
        TrainConfig cfg;
        cfg.eta = eta;
        cfg.tol = 1e-300;
        cfg.max_iters = 1000;
        const TrainResult r = train(net0, ds, cfg);
        const std::vector<double> res = balancedness_residuals(r.net);
        double total = 0.0;
        for (std::size_t l = 0; l < res.size(); ++l) total += std::abs(res[l] - base[l]);
        return total;
    };
    const double d1 = drift_at(0.01);
    const double d2 = drift_at(0.005);
    CHECK(d1 / d2 >= 3.0);
}

TEST_CASE("identical square orthogonal weights are exactly balanced inside") {
    const Architecture arch(3, 8, 8);
    const Matrix q = 0.9 * haar_orthogonal(8, 50);
    Network net{arch, {q, q, q}};
    const std::vector<double> res = balancedness_residuals(net);
    CHECK(res[0] <= 1e-12);
    CHECK(res[1] <= 1e-12);
}
