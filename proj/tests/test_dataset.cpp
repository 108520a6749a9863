#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dlnlab/dataset.hpp"
#include "dlnlab/metrics.hpp"
#include "dlnlab/rng.hpp"
#include "dlnlab/svd.hpp"

using namespace dlnlab;

TEST_CASE("generate is deterministic and shaped correctly") {
    const Dataset a = generate(50, 3, 10, 42);
    const Dataset b = generate(50, 3, 10, 42);
    CHECK(a.X.data == b.X.data);
    CHECK(a.d == 50);
    CHECK(a.N == 30);
    const Matrix y = kron_identity_ones(3, 10);
    CHECK(a.Y.data == y.data);
    CHECK(all_finite(a.X));
}

TEST_CASE("generate accepts the square boundary and rejects d < K*n") {
    CHECK_NOTHROW(generate(30, 3, 10, 1));
    CHECK_THROWS_AS(generate(29, 3, 10, 1), std::invalid_argument);
}

TEST_CASE("theta audit of orthonormal columns is zero") {
    const Dataset ds = generate_orthonormal(30, 3, 10, 9);
    const OrthogonalityAudit audit = measure_theta(ds);
    CHECK(audit.theta_hat <= 1e-9);
    CHECK(audit.compliant);
}

TEST_CASE("theta audit of 2I is pinned") {
    const std::size_t N = 6;
    Matrix x(8, N);
    for (std::size_t i = 0; i < N; ++i) x(i, i) = 2.0;
    const Dataset ds = dataset_from_features(std::move(x), 2, 3);
    const OrthogonalityAudit audit = measure_theta(ds);
    CHECK(audit.max_norm_dev == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(audit.max_inner == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(audit.theta_hat == doctest::Approx(3.0 * N).epsilon(1e-15));
    CHECK_FALSE(audit.compliant);
}

TEST_CASE("theta audit is self-consistent on generated data") {
    const Dataset ds = generate(50, 3, 10, 42);
    const OrthogonalityAudit audit = measure_theta(ds);
    CHECK(audit.theta_hat ==
          doctest::Approx(30.0 * std::max(audit.max_norm_dev, audit.max_inner)).epsilon(1e-15));
    CHECK(audit.theta_hat > 0.0);
}

TEST_CASE("theta audit is invariant under left rotation") {
    const Dataset ds = generate(40, 2, 5, 3);
    const Matrix q = haar_orthogonal(40, 77);
    const Dataset rotated = dataset_from_features(matmul(q, ds.X), 2, 5);
    CHECK(measure_theta(rotated).theta_hat ==
          doctest::Approx(measure_theta(ds).theta_hat).epsilon(1e-9));
}

TEST_CASE("class means") {
    SUBCASE("identical samples reproduce the sample") {
        Matrix x(3, 4);
        for (std::size_t j = 0; j < 4; ++j) {
            x(0, j) = 1.5;
            x(1, j) = -0.5;
            x(2, j) = 2.0;
        }
        const Matrix mu = class_mean_matrix(dataset_from_features(std::move(x), 2, 2));
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(mu(0, k) == 1.5);
            CHECK(mu(1, k) == -0.5);
            CHECK(mu(2, k) == 2.0);
        }
    }
    SUBCASE("two-sample average") {
        Matrix x(2, 2);
        x(0, 0) = 1.0;
        x(1, 1) = 1.0;
        const Matrix mu = class_mean_matrix(dataset_from_features(std::move(x), 1, 2));
        CHECK(mu(0, 0) == 0.5);
        CHECK(mu(1, 0) == 0.5);
    }
    SUBCASE("mean norms sit in the theta band") {
        const Dataset ds = generate(50, 3, 10, 42);
        const double theta = measure_theta(ds).theta_hat;
        const Matrix mu = class_mean_matrix(ds);
        for (std::size_t k = 0; k < ds.K; ++k) {
            double norm_sq = 0.0;
            for (std::size_t i = 0; i < ds.d; ++i) norm_sq += mu(i, k) * mu(i, k);
            CHECK(std::abs(norm_sq - 1.0 / static_cast<double>(ds.n)) <=
                  theta / static_cast<double>(ds.N) + 1e-12);
        }
    }
}

TEST_CASE("deviation matrices") {
    SUBCASE("identical samples give zero deviations") {
        Matrix x(3, 4, 1.0);
        const auto [dw, db] = deviation_matrices(dataset_from_features(std::move(x), 2, 2));
        CHECK(frob_norm(dw) == 0.0);
        CHECK(frob_norm(db) == 0.0);
    }
    SUBCASE("two singleton classes") {
        Matrix x(2, 2);
        x(0, 0) = 1.0;  // e1
        x(1, 1) = 1.0;  // e2
        const auto [dw, db] = deviation_matrices(dataset_from_features(std::move(x), 2, 1));
        CHECK(frob_norm(dw) == 0.0);
        CHECK(db(0, 0) == doctest::Approx(0.5));
        CHECK(db(1, 0) == doctest::Approx(-0.5));
        CHECK(db(0, 1) == doctest::Approx(-0.5));
        CHECK(db(1, 1) == doctest::Approx(0.5));
    }
    SUBCASE("per-class columns of DeltaW sum to zero") {
        const Dataset ds = generate(40, 2, 8, 5);
        const auto [dw, db] = deviation_matrices(ds);
        for (std::size_t k = 0; k < ds.K; ++k)
            for (std::size_t i = 0; i < ds.d; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < ds.n; ++j) s += dw(i, k * ds.n + j);
                CHECK(std::abs(s) <= 1e-12);
            }
    }
}

TEST_CASE("deviation norms match the layer-0 scatter traces") {
    const Dataset ds = generate(40, 2, 8, 6);
    const auto [dw, db] = deviation_matrices(ds);
    const auto [tw, tb] = scatter_traces(ds.X, ds.K, ds.n);
    CHECK(frob_norm_sq(dw) / static_cast<double>(ds.N) == doctest::Approx(tw).epsilon(1e-12));
    CHECK(frob_norm_sq(db) / static_cast<double>(ds.K) == doctest::Approx(tb).epsilon(1e-12));
}

TEST_CASE("data spectrum audit") {
    SUBCASE("orthonormal data: tight bands, all pass") {
        const Dataset ds = generate_orthonormal(30, 3, 10, 2);
        for (const SpectrumCheck& c : audit_spectrum(ds)) CHECK(c.pass);
        const auto sv = singular_values(ds.X);
        CHECK(sv.front() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sv.back() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("generated data passes across seeds") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const Dataset ds = generate(50, 3, 10, seed);
            for (const SpectrumCheck& c : audit_spectrum(ds)) {
                INFO("seed ", seed, " check ", c.name);
                CHECK(c.pass);
            }
        }
    }
}

TEST_CASE("dataset file round trip") {
    const Dataset ds = generate(35, 3, 10, 8);
    const std::string path = std::filesystem::temp_directory_path() / "dlnlab_ds_test.bin";
    save_dataset(ds, path);
    const Dataset back = load_dataset(path);
    CHECK(back.X.data == ds.X.data);
    CHECK(back.K == ds.K);
    CHECK(back.n == ds.n);
    CHECK(back.Y.data == ds.Y.data);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_dataset(path), std::runtime_error);
}
