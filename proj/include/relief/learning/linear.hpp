#pragma once

#include <array>
#include <span>
#include <vector>

#include "relief/milp/single_stage.hpp"

namespace relief {

using milp::DistrictWeights;

struct LinearRecord {
    std::array<double, 3> features;
    double target = 0.0;
};

/// Least squares of target on (1, features) with a 1e-6 ridge on the feature
/// weights; the intercept is not penalized.
DistrictWeights fit_linear(std::span<const LinearRecord> records, double ridge = 1e-6);

/// (1 - alpha) old + alpha fresh.
DistrictWeights smooth_weights(const DistrictWeights& old, const DistrictWeights& fresh, double alpha);

/// One linear value function per (epoch, district), epochs 0..T-1.
struct LinearVFA {
    std::vector<std::vector<DistrictWeights>> weights;  // [t][n]

    LinearVFA() = default;
    LinearVFA(int horizon, int districts) : weights(static_cast<std::size_t>(horizon), std::vector<DistrictWeights>(static_cast<std::size_t>(districts), DistrictWeights{})) {}

    int horizon() const { return static_cast<int>(weights.size()); }
    int districts() const { return weights.empty() ? 0 : static_cast<int>(weights.front().size()); }

    double predict(int epoch, int district, const std::array<double, 3>& features) const;

    bool operator==(const LinearVFA&) const = default;
};

}  // namespace relief
