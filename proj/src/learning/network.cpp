#include "relief/learning/network.hpp"

#include "relief/error.hpp"

namespace relief {

std::vector<Eigen::VectorXd> ReluNetwork::pre_activations(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != input_size())
        throw ValidationError("network", "input has " + std::to_string(input.size()) + " features, expected " +
                                             std::to_string(input_size()));
    std::vector<Eigen::VectorXd> out;
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::VectorXd a = layers[l].weights * x + layers[l].bias;
        out.push_back(a);
        x = l + 1 < layers.size() ? Eigen::VectorXd(a.cwiseMax(0.0)) : a;
    }
    return out;
}

double ReluNetwork::forward(std::span<const double> input) const { return pre_activations(input).back()(0); }

}  // namespace relief
