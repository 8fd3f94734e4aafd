#pragma once

#include <array>
#include <span>
#include <vector>

#include "relief/domain.hpp"
#include "relief/learning/network.hpp"
#include "relief/milp/model.hpp"
#include "relief/milp/relu_bounds.hpp"
#include "relief/milp/solver.hpp"

namespace relief::milp {

/// Big-M values of one single-stage model, derived from the state.
struct MilpEncodingConfig {
    std::vector<double> shortage_bigM;                   // [n], upper bound of |d + xi - I^x|
    std::vector<std::vector<double>> relu_lower;         // [hidden layer][neuron]
    std::vector<std::vector<double>> relu_upper;
    std::vector<std::vector<double>> vehicle_count_upper;  // [n][k]
};

/// Linear value function of one district at one epoch: intercept, then the
/// weights of (post-decision inventory, deprivation time, expected deprivation cost).
using DistrictWeights = std::array<double, 4>;

struct SingleStageModel {
    Model model;
    int epoch = 0;
    std::vector<std::vector<Var>> alloc;     // [n][k]
    std::vector<std::vector<Var>> vehicles;  // [n][k]
    std::vector<LinExpr> inventory_post;     // [n]
    std::vector<Var> expected_shortage;      // [n]
    std::vector<Var> shortage_active;        // [n], 1 when the shortage residual is positive
    std::vector<LinExpr> expected_deprivation;  // [n]
    LinExpr cw_post;
    LinExpr transport;
    /// NN only: hidden neuron outputs [layer][neuron] and the network output.
    std::vector<std::vector<LinExpr>> neurons;
    LinExpr value;
    /// Decision-independent cost of the epoch, g(delta) * h; not part of the objective.
    double constant_cost = 0.0;
    MilpEncodingConfig encoding;
};

/// min transport + sum_n Theta_tn . (1, I^x, delta, G).
SingleStageModel build_single_stage_dl(const State& state, std::span<const DistrictWeights> weights,
                                       const InstanceSpec& spec);

/// min transport + F(features), F the network over raw post-decision features.
SingleStageModel build_single_stage_nn(const State& state, const ReluNetwork& network, const InstanceSpec& spec);

/// Box containing every reachable post-decision feature vector of `state`.
std::vector<Interval> feature_box(const State& state, const InstanceSpec& spec);

/// Pin the allocation variables to a given decision.
void fix_decision(SingleStageModel& m, const Decision& decision);

/// Integral allocation from a solution; values must be within 1e-6 of an integer.
Decision extract_decision(const SingleStageModel& m, const Solution& solution, const InstanceSpec& spec);

struct SingleStageReport {
    SolveStatus status = SolveStatus::Error;
    Decision decision;
    double objective = 0.0;  // optimization objective, excluding constant_cost
    double gap = 0.0;
    Solution solution;
};

SingleStageReport solve_single_stage(const SingleStageModel& m, SolverBackend& backend, const SolveLimits& limits,
                                     const InstanceSpec& spec);

}  // namespace relief::milp
