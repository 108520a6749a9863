#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dlnlab/dataset.hpp"
#include "dlnlab/network.hpp"

namespace dlnlab {

struct TrainConfig {
    double eta = 0.1;            // learning rate per training sample
    double tol = 1e-11;          // stop once loss < tol
    std::size_t max_iters = 10'000'000;
    std::size_t log_every = 1000;  // trajectory sampling stride
};

struct TrajectoryPoint {
    std::size_t step;
    double loss;
    std::vector<double> balancedness;  // residual per adjacent pair, length L-1
};

struct TrainResult {
    Network net;
    double final_loss = 0.0;
    std::size_t iters = 0;
    bool converged = false;
    std::vector<TrajectoryPoint> trajectory;
};

struct DivergenceError : std::runtime_error {
    std::size_t step;
    explicit DivergenceError(std::size_t t)
        : std::runtime_error("training diverged (non-finite loss) at step " +
                             std::to_string(t) + "; the learning rate is too large"),
          step(t) {}
};

// 0.5 * || forward(net, X) - Y ||_F^2, summed over all samples.
double loss(const Network& net, const Dataset& ds);

// Exact gradients of the summed squared-error loss above, one matrix per
// layer. ReLU uses the backward mask with subgradient 0 at 0.
std::vector<Matrix> gradients(const Network& net, const Dataset& ds);

// Full-batch gradient descent. The update applies eta/N times the
// summed-loss gradient, i.e. eta acts on the per-sample average. Deterministic
// given (net, ds, cfg); throws DivergenceError when the loss goes non-finite.
TrainResult train(const Network& net, const Dataset& ds, const TrainConfig& cfg);

// || W_{l+1}^T W_{l+1} - W_l W_l^T ||_F for l = 1..L-1.
std::vector<double> balancedness_residuals(const Network& net);

// CSV with header step,loss,bal_1,...,bal_{L-1}.
void write_trajectory_csv(const TrainResult& result, const std::string& path);

}  // namespace dlnlab
