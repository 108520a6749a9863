#include <doctest.h>

#include <cmath>

#include "dlnlab/dataset.hpp"
#include "dlnlab/rng.hpp"
#include "dlnlab/svd.hpp"
#include "dlnlab/theory.hpp"
#include "dlnlab/training.hpp"

#include <json.hpp>

using namespace dlnlab;

namespace {

// Independent long-double evaluation of the closed-form constants, used as
// the oracle for the double-precision implementation.
std::pair<long double, long double> constants_ld(long double n, long double K, long double L,
                                                 long double eps) {
    const long double c1 = ((n - 3.0L) * K - 1.0L) / ((n - 1.0L) * K + 1.0L);
    const long double c2 = (1.0L + powl(n, -1.0L / L)) /
                           ((1.0L - powl(eps, 2.0L * (L - 1.0L)) / n) *
                            (1.0L - 1.0L / sqrtl(n)));
    return {c1, c2};
}

}  // namespace

TEST_CASE("constants at the reference point") {
    const auto [c1, c2] = constants(10, 3, 6, 0.3);
    CHECK(c1 == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
    CHECK(c2 == doctest::Approx(2.4588495675682896).epsilon(1e-13));
}

TEST_CASE("c1 increases toward 1 in n") {
    double prev = 0.0;
    for (std::size_t n : {10, 100, 10000}) {
        const auto [c1, c2] = constants(n, 3, 6, 0.3);
        CHECK(c1 > prev);
        CHECK(c1 < 1.0);
        prev = c1;
    }
    CHECK(prev == doctest::Approx(0.99973331555437029).epsilon(1e-12));
}

TEST_CASE("constants agree with an independent extended-precision route") {
    Rng rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 5 + rng.next_u64() % 200;
        const std::size_t K = 1 + rng.next_u64() % 9;
        const std::size_t L = 2 + rng.next_u64() % 9;
        const double eps = 0.05 + 0.9 * rng.uniform01();
        if ((n - 3) * K <= 1) continue;
        if (std::pow(eps, 2.0 * (L - 1)) >= static_cast<double>(n)) continue;
        const auto [c1, c2] = constants(n, K, L, eps);
        const auto [c1l, c2l] = constants_ld(n, K, L, eps);
        CHECK(c1 == doctest::Approx(static_cast<double>(c1l)).epsilon(1e-12));
        CHECK(c2 == doctest::Approx(static_cast<double>(c2l)).epsilon(1e-12));
    }
}

TEST_CASE("constants domain errors") {
    CHECK_THROWS_AS(constants(3, 3, 4, 0.3), std::domain_error);   // c1 <= 0
    CHECK_THROWS_AS(constants(4, 1, 4, 0.3), std::domain_error);   // (n-3)K = 1
    CHECK_THROWS_AS(constants(10, 3, 6, 1.3), std::domain_error);  // eps^{2(L-1)} >= n
}

TEST_CASE("compression bounds at the reference points") {
    const TheoryBounds b = compression_bounds(10, 3, 6, 0.3);
    CHECK(b.ratio_lower_first == doctest::Approx(0.015046845455994302).epsilon(1e-12));
    CHECK(b.ratio_upper_first == doctest::Approx(0.47384630617461592).epsilon(1e-12));
    CHECK(b.ratio_lower == doctest::Approx(0.011226455732555056).epsilon(1e-12));
    CHECK(b.ratio_upper == doctest::Approx(0.39833701826189610).epsilon(1e-12));

    const TheoryBounds b1 = compression_bounds(10, 3, 6, 0.1);
    CHECK(b1.ratio_lower == doctest::Approx(0.0012473847068396170).epsilon(1e-12));
    CHECK(b1.ratio_upper == doctest::Approx(0.044259642561317070).epsilon(1e-12));

    const TheoryBounds b5 = compression_bounds(10, 3, 6, 0.5);
    CHECK(b5.ratio_lower == doctest::Approx(0.031181572298482805).epsilon(1e-12));
    CHECK(b5.ratio_upper == doctest::Approx(1.1065991303431843).epsilon(1e-12));
}

TEST_CASE("bounds shrink as eps^2 and stay ordered") {
    const TheoryBounds tiny = compression_bounds(10, 3, 6, 1e-6);
    CHECK(tiny.ratio_lower < 1e-11);
    CHECK(tiny.ratio_upper < 1e-11);

    Rng rng(72);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.next_u64() % 300;
        const std::size_t K = 1 + rng.next_u64() % 9;
        const std::size_t L = 2 + rng.next_u64() % 9;
        const double eps = 0.05 + 0.9 * rng.uniform01();
        if ((n - 3) * K <= 1) continue;
        if (std::pow(eps, 2.0 * (L - 1)) >= static_cast<double>(n)) continue;
        const TheoryBounds b = compression_bounds(n, K, L, eps);
        CHECK(b.ratio_lower > 0.0);
        CHECK(b.ratio_lower < b.ratio_upper);
        CHECK(b.ratio_lower_first < b.ratio_upper_first);
        CHECK(b.c1 > 0.0);
        CHECK(b.c1 < 1.0);
    }
}

TEST_CASE("hypothesis check") {
    SUBCASE("all-zero parameters pass") {
        AssumptionParams p;
        CHECK(hypothesis_check(p, 10, 3, 6).ok);
    }
    SUBCASE("theta at 0.3 fails the strict quarter rule") {
        AssumptionParams p;
        p.theta_hat = 0.3;
        const HypothesisReport r = hypothesis_check(p, 10, 3, 6);
        CHECK_FALSE(r.ok);
        bool theta_flagged = false;
        for (const ConditionMargin& c : r.conditions)
            if (c.name == "theta") theta_flagged = !c.ok;
        CHECK(theta_flagged);
    }
    SUBCASE("delta bound at the reference point") {
        AssumptionParams p;
        p.delta_hat = 0.05;
        const HypothesisReport r = hypothesis_check(p, 10, 3, 6);
        CHECK_FALSE(r.ok);
        for (const ConditionMargin& c : r.conditions)
            if (c.name == "delta") {
                CHECK(c.limit == doctest::Approx(0.0015255083078167275).epsilon(1e-12));
                CHECK_FALSE(c.ok);
            }
    }
}

TEST_CASE("discrimination bound endpoints") {
    for (std::size_t l = 1; l <= 5; ++l)
        CHECK(discrimination_bound(0, 0, 0, 10, 3, 6, l) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(discrimination_bound(0, 0, 1.0, 10, 3, 6, 5) ==
          doctest::Approx(-3.6969576563906225).epsilon(1e-13));

    // With eps below n^{1/(2L)} every term shrinks in l.
    double prev = -1e300;
    for (std::size_t l = 1; l <= 5; ++l) {
        const double b = discrimination_bound(0.1, 0.001, 0.2, 10, 3, 6, l);
        CHECK(b >= prev);
        prev = b;
    }
    CHECK_THROWS_AS(discrimination_bound(0, 0, 0, 10, 3, 6, 0), std::invalid_argument);
    CHECK_THROWS_AS(discrimination_bound(0, 0, 0, 10, 3, 6, 6), std::invalid_argument);
}

TEST_CASE("extract_params on a fresh orthogonal init") {
    const double xi = 0.3;
    const Dataset ds = generate(50, 3, 10, 42);
    const Architecture arch(6, 50, 3);
    const Network net = init_orthogonal(arch, xi, 42);
    const AssumptionParams p = extract_params(net, ds);
    CHECK(p.eps_hat == doctest::Approx(xi).epsilon(1e-9));
    CHECK(p.rho_hat <= 1e-9);
    CHECK(p.delta_hat == doctest::Approx(0.61700891403609397).epsilon(1e-9));
    CHECK(p.interior_bal_max <= 1e-9);
    CHECK(p.theta_hat == doctest::Approx(measure_theta(ds).theta_hat).epsilon(1e-15));
}

TEST_CASE("extract_params requires d > 2K") {
    const Dataset ds = generate_orthonormal(6, 3, 2, 1);
    const Architecture arch(3, 6, 3);
    const Network net = init_orthogonal(arch, 0.3, 1);
    CHECK_THROWS_AS(extract_params(net, ds), std::invalid_argument);
}

TEST_CASE("residual metrics") {
    SUBCASE("an exact least-norm interpolator has zero residual") {
        const Dataset ds = generate_orthonormal(30, 3, 10, 73);
        Network net{Architecture(2, 30, 3), {transpose(ds.X), ds.Y}};
        const ResidualMetrics r = residual_metrics(net, ds);
        CHECK(r.min_norm <= 1e-9);
    }
    SUBCASE("fresh init has frozen middle spectrum") {
        const Dataset ds = generate(40, 3, 10, 74);
        const Network net = init_orthogonal(Architecture(4, 40, 3), 0.2, 74);
        const ResidualMetrics r = residual_metrics(net, ds);
        CHECK(r.sv_var <= 1e-18);
    }
}

TEST_CASE("weight spectrum audit") {
    // Short training run on strictly orthonormal data: the lemma hypotheses
    // hold to numerical accuracy and every band check must pass.
    const Dataset ds = generate_orthonormal(30, 3, 10, 75);
    const Network net0 = init_orthogonal(Architecture(3, 30, 3), 0.3, 75);
    const TrainResult tr = train(net0, ds, TrainConfig{});
    REQUIRE(tr.converged);
    for (const SpectrumCheck& c : audit_spectra(tr.net, ds)) {
        INFO(c.name);
        CHECK(c.pass);
    }

    SUBCASE("rescaling one layer breaks the per-layer band") {
        Network bad = tr.net;
        for (double& v : bad.weights[0].data) v *= 10.0;
        bool some_failed = false;
        for (const SpectrumCheck& c : audit_spectra(bad, ds)) some_failed |= !c.pass;
        CHECK(some_failed);
    }
}

TEST_CASE("weight spectrum audit passes on a trained synthetic-data run") {
    const Dataset ds = generate(50, 3, 10, 42);
    const Network net0 = init_orthogonal(Architecture(6, 50, 3), 0.3, 42);
    const TrainResult tr = train(net0, ds, TrainConfig{});
    REQUIRE(tr.converged);
    for (const SpectrumCheck& c : audit_spectra(tr.net, ds)) {
        INFO(c.name);
        CHECK(c.pass);
    }
}

TEST_CASE("audit json is parseable and carries every field") {
    const Dataset ds = generate_orthonormal(30, 3, 10, 76);
    const auto checks = audit_spectrum(ds);
    const auto parsed = nlohmann::json::parse(checks_to_json(checks));
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == checks.size());
    for (const auto& o : parsed) {
        CHECK(o.contains("name"));
        CHECK(o.contains("lhs"));
        CHECK(o.contains("rhs"));
        CHECK(o.contains("pass"));
        CHECK(o.contains("margin"));
    }
}
