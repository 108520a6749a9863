#include "dlnlab/training.hpp"

#include <cmath>
#include <fstream>

#include "dlnlab/io_util.hpp"

namespace dlnlab {

namespace {

// Forward pass into preallocated activations; zs[l] is the post-activation
// output of layer l+1 (zs.back() is the raw network output, no ReLU).
void forward_into(const Network& net, const Matrix& X, std::vector<Matrix>& zs) {
    const std::size_t L = net.arch.L;
    const bool relu = net.arch.activation == Activation::ReLU;
    const Matrix* prev = &X;
    for (std::size_t l = 0; l < L; ++l) {
        matmul_into(zs[l], net.weights[l], *prev);
        if (relu && l + 1 < L)
            for (double& v : zs[l].data)
                if (v < 0.0) v = 0.0;
        prev = &zs[l];
    }
}

// Backward pass. On entry zs holds activations and err = output - Y; fills
// grads with d(loss)/dW_l. bufs are scratch of matching shapes.
void backward_into(const Network& net, const Matrix& X, const std::vector<Matrix>& zs,
                   Matrix& err, std::vector<Matrix>& grads, Matrix& bprev, Matrix& bcur) {
    const std::size_t L = net.arch.L;
    const bool relu = net.arch.activation == Activation::ReLU;
    const Matrix* upstream = &err;
    for (std::size_t l = L; l-- > 0;) {
        const Matrix& input = (l == 0) ? X : zs[l - 1];
        matmul_nt_into(grads[l], *upstream, input);
        if (l > 0) {
            Matrix& down = (upstream == &bcur) ? bprev : bcur;
            matmul_tn_into(down, net.weights[l], *upstream);
            if (relu)
                for (std::size_t i = 0; i < down.data.size(); ++i)
                    if (zs[l - 1].data[i] <= 0.0) down.data[i] = 0.0;
            upstream = &down;
        }
    }
}

}  // namespace

double loss(const Network& net, const Dataset& ds) {
    const Matrix out = forward(net, ds.X);
    check_same_shape(out, ds.Y, "loss");
    double s = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double e = out.data[i] - ds.Y.data[i];
        s += e * e;
    }
    return 0.5 * s;
}

std::vector<Matrix> gradients(const Network& net, const Dataset& ds) {
    const std::size_t L = net.arch.L;
    std::vector<Matrix> zs(L);
    forward_into(net, ds.X, zs);
    Matrix err = zs.back() - ds.Y;
    std::vector<Matrix> grads(L);
    Matrix b1, b2;
    backward_into(net, ds.X, zs, err, grads, b1, b2);
    return grads;
}

std::vector<double> balancedness_residuals(const Network& net) {
    std::vector<double> res;
    res.reserve(net.arch.L - 1);
    for (std::size_t l = 0; l + 1 < net.arch.L; ++l) {
        const Matrix gram_next = matmul_tn(net.weights[l + 1], net.weights[l + 1]);
        const Matrix gram_prev = matmul_nt(net.weights[l], net.weights[l]);
        res.push_back(frob_norm(gram_next - gram_prev));
    }
    return res;
}

TrainResult train(const Network& net, const Dataset& ds, const TrainConfig& cfg) {
    if (!(cfg.eta > 0.0) || !(cfg.tol > 0.0) || cfg.max_iters < 1)
        throw std::invalid_argument("train: eta > 0, tol > 0, max_iters >= 1 required");

    TrainResult result{net};
    Network& w = result.net;
    const std::size_t L = w.arch.L;
    const double step = cfg.eta / static_cast<double>(ds.N);

    std::vector<Matrix> zs(L), grads(L);
    Matrix err, b1, b2;

    auto record = [&](std::size_t t, double lv) {
        if (!result.trajectory.empty() && result.trajectory.back().step == t) return;
        result.trajectory.push_back({t, lv, balancedness_residuals(w)});
    };

    std::size_t t = 0;
    for (;; ++t) {
        forward_into(w, ds.X, zs);
        err = zs.back() - ds.Y;
        double lv = 0.0;
        for (double e : err.data) lv += e * e;
        lv *= 0.5;
        if (!std::isfinite(lv)) throw DivergenceError(t);
        if (lv < cfg.tol) {
            result.converged = true;
            result.final_loss = lv;
            break;
        }
        if (t >= cfg.max_iters) {
            result.converged = false;
            result.final_loss = lv;
            break;
        }
        if (t % cfg.log_every == 0) record(t, lv);
        backward_into(w, ds.X, zs, err, grads, b1, b2);
        for (std::size_t l = 0; l < L; ++l) {
            double* wd = w.weights[l].data.data();
            const double* gd = grads[l].data.data();
            const std::size_t sz = w.weights[l].data.size();
            for (std::size_t i = 0; i < sz; ++i) wd[i] -= step * gd[i];
        }
    }
    result.iters = t;
    record(t, result.final_loss);
    return result;
}

void write_trajectory_csv(const TrainResult& result, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    const std::size_t npairs =
        result.trajectory.empty() ? 0 : result.trajectory.front().balancedness.size();
    os << "step,loss";
    for (std::size_t l = 1; l <= npairs; ++l) os << ",bal_" << l;
    os << "\n";
    for (const TrajectoryPoint& p : result.trajectory) {
        os << p.step << ',' << fmt_double(p.loss);
        for (double b : p.balancedness) os << ',' << fmt_double(b);
        os << "\n";
    }
    if (!os) throw std::runtime_error("write_trajectory_csv: write failed for " + path);
}

}  // namespace dlnlab
