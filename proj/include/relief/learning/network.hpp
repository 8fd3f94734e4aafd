#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace relief {

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;

    bool operator==(const DenseLayer& o) const { return weights == o.weights && bias == o.bias; }
};

/// Feed-forward network over raw inputs: ReLU after every layer but the last,
/// which has a single linear output.
struct ReluNetwork {
    std::vector<DenseLayer> layers;

    int input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols()); }
    int hidden_layers() const { return static_cast<int>(layers.size()) - 1; }

    double forward(std::span<const double> input) const;

    /// Pre-activation values of every layer (the last entry is the output).
    std::vector<Eigen::VectorXd> pre_activations(std::span<const double> input) const;

    bool operator==(const ReluNetwork&) const = default;
};

}  // namespace relief
