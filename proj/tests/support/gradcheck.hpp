#pragma once

// Central finite differences against backprop for the MSE loss.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "relief/learning/mlp.hpp"

namespace gradcheck {

inline relief::ReluNetwork random_network(std::mt19937_64& gen, int inputs, const std::vector<int>& widths) {
    std::normal_distribution<double> nd(0.0, 0.7);
    relief::ReluNetwork net;
    int in = inputs;
    for (int out : widths) {
        relief::DenseLayer l{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
        for (int i = 0; i < out; ++i) {
            for (int j = 0; j < in; ++j) l.weights(i, j) = nd(gen);
            l.bias(i) = nd(gen);
        }
        net.layers.push_back(l);
        in = out;
    }
    return net;
}

inline std::vector<std::vector<bool>> signs(const relief::ReluNetwork& net, const Eigen::MatrixXd& x) {
    std::vector<std::vector<bool>> out;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Eigen::VectorXd xr = x.row(r).transpose();
        std::vector<bool> s;
        for (const auto& pre : net.pre_activations(std::span<const double>(xr.data(), static_cast<std::size_t>(xr.size()))))
            for (Eigen::Index i = 0; i < pre.size(); ++i) s.push_back(pre(i) > 0.0);
        out.push_back(std::move(s));
    }
    return out;
}

struct Result {
    double max_rel_error = 0.0;
    int checked = 0;
    int skipped = 0;  // parameters whose perturbation crosses a ReLU kink
};

inline double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-7}); }

/// Compares every weight and bias derivative; perturbations that change an
/// activation pattern are skipped since the loss is not differentiable there.
inline Result check(relief::ReluNetwork net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double h = 1e-4) {
    std::vector<int> rows(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
    const relief::Gradient g = relief::mse_gradient_serial(net, x, y, rows);
    const auto base = signs(net, x);
    Result res;
    auto probe = [&](double& param, double analytic) {
        const double keep = param;
        param = keep + h;
        const double up = relief::mse_loss(net, x, y, rows);
        const bool same_up = signs(net, x) == base;
        param = keep - h;
        const double down = relief::mse_loss(net, x, y, rows);
        const bool same_down = signs(net, x) == base;
        param = keep;
        if (!same_up || !same_down) {
            ++res.skipped;
            return;
        }
        res.max_rel_error = std::max(res.max_rel_error, rel_error(analytic, (up - down) / (2.0 * h)));
        ++res.checked;
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) probe(layer.weights(i, j), g.layers[l].weights(i, j));
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) probe(layer.bias(i), g.layers[l].bias(i));
    }
    return res;
}

}  // namespace gradcheck
