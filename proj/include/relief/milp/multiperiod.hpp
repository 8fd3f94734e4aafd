#pragma once

#include <vector>

#include "relief/domain.hpp"
#include "relief/milp/model.hpp"
#include "relief/milp/solver.hpp"

namespace relief::milp {

/// Full-horizon model from a pre-decision state at t0 through the terminal
/// epoch, with the transition as constraints.
///
/// Per epoch t and district n: coverage binary y (1 when I^x > d), next
/// inventory y * (I^x - d), shortage d - I^x + I', and level indicators z over
/// the deprivation levels reachable at t, so that g(delta) * h is linear via
/// per-level shortage columns. The z are continuous; integrality of the
/// coverage binaries already forces them to be one-hot.
struct MultiPeriodModel {
    Model model;
    int start_epoch = 0;
    std::vector<std::vector<std::vector<Var>>> alloc;  // [t - t0][n][k], t0..T-1
    std::vector<std::vector<std::vector<Var>>> vehicles;
    std::vector<std::vector<Var>> coverage;   // [t - t0][n]
    std::vector<std::vector<Var>> inventory;  // [t - t0][n], pre-decision inventory for t0+1..T
    std::vector<std::vector<LinExpr>> shortage;  // [t - t0][n], t0+1..T
    std::vector<std::vector<std::vector<std::pair<int, Var>>>> levels;  // [t - t0][n] -> (delta, indicator), t0+1..T
    LinExpr transport;
    LinExpr deprivation;
    double constant_cost = 0.0;  // deprivation charged at t0
};

/// `future[j]` holds W_{t0+1+j}, j = 0..T-t0-1. Realized demands are rounded
/// to whole units.
MultiPeriodModel build_multiperiod(const State& state0, const InstanceSpec& spec,
                                   const std::vector<ExogenousEvent>& future);

/// Expected-value events for the remaining horizon. With `margin`, two forecast
/// standard deviations are added to the demand of the next period only.
std::vector<ExogenousEvent> expected_events(const State& state, const InstanceSpec& spec, bool margin);

struct ScheduleReport {
    SolveStatus status = SolveStatus::Error;
    std::vector<Decision> decisions;  // t0..T-1
    double objective = 0.0;           // total cost t0..T, including constant_cost
    double bound = 0.0;
    double gap = 0.0;
    double seconds = 0.0;
    double transport_uav = 0.0;
    double transport_truck = 0.0;
    double deprivation = 0.0;

    bool has_schedule() const noexcept { return !decisions.empty(); }
};

ScheduleReport solve_multiperiod(const MultiPeriodModel& m, SolverBackend& backend, const SolveLimits& limits,
                                 const InstanceSpec& spec);

}  // namespace relief::milp
