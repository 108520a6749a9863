// Compares the serial reference kernels against the OpenMP kernels and times
// a full training step at a few representative sizes.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dlnlab/dataset.hpp"
#include "dlnlab/network.hpp"
#include "dlnlab/rng.hpp"
#include "dlnlab/training.hpp"

using namespace dlnlab;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

void bench_matmul(std::size_t m, std::size_t k, std::size_t n, int reps) {
    Rng rng(99);
    const Matrix a = gaussian_matrix(m, k, rng);
    const Matrix b = gaussian_matrix(k, n, rng);
    Matrix c;

    matmul_into_serial(c, a, b);  // warm up + reference result
    const Matrix ref = c;

    auto t0 = clk::now();
    for (int r = 0; r < reps; ++r) matmul_into_serial(c, a, b);
    const double ts = seconds_since(t0) / reps;

    t0 = clk::now();
    for (int r = 0; r < reps; ++r) matmul_into(c, a, b);
    const double tp = seconds_since(t0) / reps;

    bool identical = c.data == ref.data;
    const double gflops = 2.0 * m * k * n * 1e-9;
    std::printf("matmul %4zux%-4zu * %4zux%-4zu  serial %8.3f ms (%6.2f GF/s)  "
                "omp %8.3f ms (%6.2f GF/s)  speedup %.2fx  bitwise-equal %s\n",
                m, k, k, n, ts * 1e3, gflops / ts, tp * 1e3, gflops / tp, ts / tp,
                identical ? "yes" : "NO");
}

void bench_train_step(std::size_t d, std::size_t L, int reps) {
    const Dataset ds = generate(d, 3, 10, 1);
    const Architecture arch(L, d, 3, Activation::Linear);
    const Network net = init_orthogonal(arch, 0.1, 1);
    TrainConfig cfg;
    cfg.eta = 0.1;
    cfg.tol = 1e-300;  // never stop early
    cfg.max_iters = static_cast<std::size_t>(reps);
    cfg.log_every = static_cast<std::size_t>(reps) + 1;
    const auto t0 = clk::now();
    const TrainResult r = train(net, ds, cfg);
    const double dt = seconds_since(t0) / reps;
    std::printf("train step d=%-4zu L=%zu  %8.3f ms/step (loss after %d steps: %.3e)\n", d, L,
                dt * 1e3, reps, r.final_loss);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled (serial build)\n");
#endif
    bench_matmul(50, 50, 30, 2000);
    bench_matmul(200, 200, 30, 400);
    bench_matmul(200, 200, 200, 100);
    bench_matmul(400, 400, 400, 20);
    bench_train_step(50, 6, 2000);
    bench_train_step(200, 5, 400);
    return 0;
}
