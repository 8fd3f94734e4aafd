#include "relief/milp/relu_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "relief/error.hpp"

namespace relief::milp {

ReluBounds derive_relu_bounds(const ReluNetwork& network, std::span<const Interval> inputs) {
    if (static_cast<int>(inputs.size()) != network.input_size())
        throw ValidationError("network", "feature box does not match the input layer");
    ReluBounds out;
    std::vector<Interval> current(inputs.begin(), inputs.end());
    for (std::size_t l = 0; l < network.layers.size(); ++l) {
        const auto& layer = network.layers[l];
        std::vector<Interval> pre(static_cast<std::size_t>(layer.weights.rows()));
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
            double lo = layer.bias(i);
            double hi = layer.bias(i);
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
                const double w = layer.weights(i, j);
                const auto& in = current[static_cast<std::size_t>(j)];
                lo += w >= 0 ? w * in.lower : w * in.upper;
                hi += w >= 0 ? w * in.upper : w * in.lower;
            }
            if (!std::isfinite(lo) || !std::isfinite(hi))
                throw ValidationError("network", "non-finite activation bound in layer " + std::to_string(l));
            pre[static_cast<std::size_t>(i)] = {lo, hi};
        }
        out.layers.push_back(pre);
        current.clear();
        for (const auto& iv : pre) current.push_back({std::max(0.0, iv.lower), std::max(0.0, iv.upper)});
    }
    return out;
}

}  // namespace relief::milp
