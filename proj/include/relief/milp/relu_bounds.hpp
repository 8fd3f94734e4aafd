#pragma once

#include <span>
#include <vector>

#include "relief/learning/network.hpp"

namespace relief::milp {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Pre-activation bounds per layer, [layer][neuron]; the last layer is the output.
struct ReluBounds {
    std::vector<std::vector<Interval>> layers;
};

/// Interval propagation through the network for inputs in the given box.
/// Sound: every reachable pre-activation lies inside its interval.
ReluBounds derive_relu_bounds(const ReluNetwork& network, std::span<const Interval> inputs);

}  // namespace relief::milp
