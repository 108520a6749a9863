#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlnlab/matrix.hpp"

namespace dlnlab {

enum class Activation { Linear, ReLU };
enum class InitMode { Orthogonal, UniformKaiming };

// L-layer network with uniform hidden width d: W_1..W_{L-1} are d x d and the
// classifier W_L is K x d. Heterogeneous widths are rejected up front.
struct Architecture {
    std::size_t L;
    std::size_t d_in;
    std::size_t hidden;
    std::size_t K;
    Activation activation;

    Architecture(std::size_t layers, std::size_t d, std::size_t classes,
                 Activation act = Activation::Linear);
};

struct Network {
    Architecture arch;
    std::vector<Matrix> weights;  // W_1 ... W_L
};

// W_l = xi * Q_l (Haar) for l < L; W_L = [xi * U | 0] with U Haar on K x K.
Network init_orthogonal(const Architecture& arch, double xi, std::uint64_t seed);

// Entries uniform on [-1/sqrt(d), 1/sqrt(d)]; exploratory mode, not covered
// by the balancedness predictions.
Network init_uniform_kaiming(const Architecture& arch, std::uint64_t seed);

// K x N outputs; ReLU (when configured) is applied after layers 1..L-1 only,
// never after the classifier.
Matrix forward(const Network& net, const Matrix& X);

// Layer outputs Z^1 .. Z^{L-1} (each d x N). Z^0 is the input itself and is
// not duplicated here.
std::vector<Matrix> features(const Network& net, const Matrix& X);

// Ordered product W_L ... W_1 (K x d). Only defined for Linear networks.
Matrix end_to_end(const Network& net);

// Checkpoint format, magic "DLNNET01"; see README for the layout.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace dlnlab
