#pragma once

#include <functional>
#include <memory>
#include <string>

#include "relief/domain.hpp"
#include "relief/instances.hpp"
#include "relief/learning/linear.hpp"
#include "relief/learning/mlp.hpp"
#include "relief/milp/multiperiod.hpp"
#include "relief/milp/solver.hpp"
#include "relief/rng.hpp"

namespace relief {

/// Backend name ("" = RELIEF_SOLVER or the default) and per-solve limits.
struct SolverSettings {
    std::string backend;
    milp::SolveLimits limits;
};

/// What happened while producing the last decision.
struct DecisionInfo {
    bool solved = false;    // a MILP was solved
    bool fallback = false;  // the solver gave no incumbent and the rule-based decision was used
    double gap = 0.0;
    double seconds = 0.0;
};

class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;

    /// Called once per episode before the first decision. Only the
    /// perfect-information policy looks at the path.
    virtual void begin_episode(const SamplePath&) {}

    /// A feasible decision for `state`; at the terminal epoch this is empty.
    virtual Decision decide(const State& state, Rng& rng) = 0;

    /// Independent copy with its own solver backend.
    virtual std::unique_ptr<Policy> clone() const = 0;

    /// True when the decision depends on the state only.
    virtual bool deterministic() const { return true; }

    const DecisionInfo& last_info() const noexcept { return info_; }

protected:
    DecisionInfo info_;
};

/// Source of the uniform integer draws of the warm-up heuristic: returns a
/// value in [lo, hi].
using DrawFn = std::function<int(int lo, int hi)>;

/// Step 3a of the warm-up heuristic. For each district with delta >= Z1 send
/// Z2 full UAV loads when the remaining stock suffices; then pick a random
/// district n1 and, when its delta >= Z3, replace its UAV loads by one truck
/// carrying min(q_truck, remaining stock + those loads).
Decision warmup_decide(const State& state, const InstanceSpec& spec, const DrawFn& draw);
Decision warmup_decide(const State& state, const InstanceSpec& spec, Rng& rng);

/// UAV loads covering the forecast for every district with delta >= 2, then
/// the UAV loads of the district with the highest current deprivation cost
/// plus all remaining stock go to that district by truck (lowest index on
/// ties). Trucks only leave while some district has delta >= 2.
Decision rule_based_decide(const State& state, const InstanceSpec& spec);

class WarmupPolicy final : public Policy {
public:
    explicit WarmupPolicy(InstanceSpec spec) : spec_(std::move(spec)) {}
    std::string name() const override { return "warm-up"; }
    Decision decide(const State& state, Rng& rng) override;
    std::unique_ptr<Policy> clone() const override { return std::make_unique<WarmupPolicy>(*this); }
    bool deterministic() const override { return false; }

private:
    InstanceSpec spec_;
};

class RuleBasedPolicy final : public Policy {
public:
    explicit RuleBasedPolicy(InstanceSpec spec) : spec_(std::move(spec)) {}
    std::string name() const override { return "rule-based"; }
    Decision decide(const State& state, Rng& rng) override;
    std::unique_ptr<Policy> clone() const override { return std::make_unique<RuleBasedPolicy>(*this); }

private:
    InstanceSpec spec_;
};

/// Shared plumbing of the policies that call a solver.
class SolverPolicy : public Policy {
public:
    SolverPolicy(InstanceSpec spec, SolverSettings settings);
    SolverPolicy(const SolverPolicy& other);

protected:
    /// Records the solve outcome; returns the rule-based decision when the
    /// solver produced nothing usable.
    Decision finish(const State& state, bool has_solution, Decision decision, double gap, double seconds);

    InstanceSpec spec_;
    SolverSettings settings_;
    std::unique_ptr<milp::SolverBackend> backend_;
};

/// Greedy with respect to a decomposed linear value function.
class DlVfaPolicy final : public SolverPolicy {
public:
    DlVfaPolicy(InstanceSpec spec, LinearVFA vfa, SolverSettings settings);
    std::string name() const override { return "dl-vfa"; }
    Decision decide(const State& state, Rng& rng) override;
    std::unique_ptr<Policy> clone() const override { return std::make_unique<DlVfaPolicy>(*this); }
    const LinearVFA& vfa() const noexcept { return vfa_; }

private:
    LinearVFA vfa_;
};

/// Greedy with respect to a ReLU network over the full post-decision state.
class NnVfaPolicy final : public SolverPolicy {
public:
    NnVfaPolicy(InstanceSpec spec, MlpVFA vfa, SolverSettings settings);
    std::string name() const override { return "nn-vfa"; }
    Decision decide(const State& state, Rng& rng) override;
    std::unique_ptr<Policy> clone() const override { return std::make_unique<NnVfaPolicy>(*this); }
    const MlpVFA& vfa() const noexcept { return vfa_; }

private:
    MlpVFA vfa_;
    ReluNetwork folded_;
};

/// Rolling deterministic model over the remaining horizon with expected
/// demand; a 2 sigma margin on the coming period when `margin` is set.
class ReoptimizationPolicy final : public SolverPolicy {
public:
    ReoptimizationPolicy(InstanceSpec spec, SolverSettings settings, bool margin = true);
    std::string name() const override { return "re-optimization"; }
    Decision decide(const State& state, Rng& rng) override;
    std::unique_ptr<Policy> clone() const override { return std::make_unique<ReoptimizationPolicy>(*this); }

private:
    bool margin_;
};

/// Replays the optimal schedule for the realized path (a lower bound, not a
/// nonanticipative policy).
class PerfectInformationPolicy final : public SolverPolicy {
public:
    PerfectInformationPolicy(InstanceSpec spec, SolverSettings settings);
    std::string name() const override { return "pi"; }
    void begin_episode(const SamplePath& path) override;
    Decision decide(const State& state, Rng& rng) override;
    std::unique_ptr<Policy> clone() const override { return std::make_unique<PerfectInformationPolicy>(*this); }

    /// Solver report of the current episode's schedule.
    double objective() const noexcept { return objective_; }
    double bound() const noexcept { return bound_; }

private:
    std::vector<Decision> schedule_;
    double objective_ = 0.0;
    double bound_ = 0.0;
    double gap_ = 0.0;
    double seconds_ = 0.0;
};

}  // namespace relief

namespace relief {

/// Full-horizon model on the realized path (the perfect-information bound).
milp::ScheduleReport perfect_information(const SamplePath& path, const InstanceSpec& spec,
                                         milp::SolverBackend& backend, const milp::SolveLimits& limits);

}  // namespace relief
