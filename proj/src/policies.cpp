#include "relief/policies.hpp"

#include <algorithm>
#include <cmath>

#include "relief/error.hpp"
#include "relief/milp/multiperiod.hpp"
#include "relief/milp/single_stage.hpp"

namespace relief {

Decision warmup_decide(const State& state, const InstanceSpec& spec, const DrawFn& draw) {
    const int n_districts = spec.num_districts();
    Decision x(n_districts, spec.num_modes());
    if (state.epoch >= spec.horizon) return x;
    const int uav = spec.mode_index(ModeKind::Uav);
    const int truck = spec.mode_index(ModeKind::Truck);
    Units remaining = state.cw_inventory;
    if (uav >= 0) {
        const Units q = spec.modes[static_cast<std::size_t>(uav)].capacity;
        for (int n = 0; n < n_districts; ++n) {
            if (state.districts[static_cast<std::size_t>(n)].deprivation_time < draw(1, 3)) continue;
            const Units interim = q * draw(1, 3);
            if (interim <= remaining) {
                x(n, uav) = interim;
                remaining -= interim;
            }
        }
    }
    if (truck >= 0) {
        const int n1 = draw(0, n_districts - 1);
        const Units prior = uav >= 0 ? x(n1, uav) : 0;
        const Units amount = std::min(spec.modes[static_cast<std::size_t>(truck)].capacity, remaining + prior);
        if (state.districts[static_cast<std::size_t>(n1)].deprivation_time >= draw(1, 3)) {
            if (uav >= 0) x(n1, uav) = 0;
            x(n1, truck) = amount;
        }
    }
    return x;
}

Decision warmup_decide(const State& state, const InstanceSpec& spec, Rng& rng) {
    return warmup_decide(state, spec, [&rng](int lo, int hi) { return rng.uniform_int(lo, hi); });
}

Decision rule_based_decide(const State& state, const InstanceSpec& spec) {
    const int n_districts = spec.num_districts();
    Decision x(n_districts, spec.num_modes());
    if (state.epoch >= spec.horizon) return x;
    const int uav = spec.mode_index(ModeKind::Uav);
    const int truck = spec.mode_index(ModeKind::Truck);
    Units remaining = state.cw_inventory;
    bool triggered = false;
    for (int n = 0; n < n_districts; ++n) {
        const auto& d = state.districts[static_cast<std::size_t>(n)];
        if (d.deprivation_time < 2) continue;
        triggered = true;
        if (uav < 0) continue;
        const Units q = spec.modes[static_cast<std::size_t>(uav)].capacity;
        const Units loads = static_cast<Units>(std::ceil(d.demand_forecast / static_cast<double>(q) - 1e-9));
        const Units amount = std::min(loads * q, remaining);
        x(n, uav) = amount;
        remaining -= amount;
    }
    // nothing moves until some district has waited two periods
    if (truck < 0 || !triggered) return x;
    int target = 0;
    double worst = -1.0;
    for (int n = 0; n < n_districts; ++n) {
        const double c = district_deprivation_cost(state, n, spec);
        if (c > worst) {
            worst = c;
            target = n;
        }
    }
    const Units moved = (uav >= 0 ? x(target, uav) : 0) + remaining;
    if (moved > 0) {
        if (uav >= 0) x(target, uav) = 0;
        x(target, truck) = moved;
    }
    return x;
}

Decision WarmupPolicy::decide(const State& state, Rng& rng) {
    info_ = {};
    return warmup_decide(state, spec_, rng);
}

Decision RuleBasedPolicy::decide(const State& state, Rng&) {
    info_ = {};
    return rule_based_decide(state, spec_);
}

SolverPolicy::SolverPolicy(InstanceSpec spec, SolverSettings settings)
    : spec_(std::move(spec)), settings_(std::move(settings)), backend_(milp::make_backend(settings_.backend)) {}

SolverPolicy::SolverPolicy(const SolverPolicy& other)
    : Policy(other), spec_(other.spec_), settings_(other.settings_), backend_(other.backend_->clone()) {}

Decision SolverPolicy::finish(const State& state, bool has_solution, Decision decision, double gap, double seconds) {
    info_ = {};
    info_.solved = true;
    info_.seconds = seconds;
    if (!has_solution) {
        info_.fallback = true;
        info_.gap = 1.0;
        return rule_based_decide(state, spec_);
    }
    info_.gap = gap;
    return decision;
}

DlVfaPolicy::DlVfaPolicy(InstanceSpec spec, LinearVFA vfa, SolverSettings settings)
    : SolverPolicy(std::move(spec), std::move(settings)), vfa_(std::move(vfa)) {
    if (vfa_.horizon() != spec_.horizon || vfa_.districts() != spec_.num_districts())
        throw ValidationError("vfa", "linear value function shape does not match the instance");
}

Decision DlVfaPolicy::decide(const State& state, Rng&) {
    if (state.epoch >= spec_.horizon) {
        info_ = {};
        return Decision(spec_.num_districts(), spec_.num_modes());
    }
    const auto model = milp::build_single_stage_dl(state, vfa_.weights[static_cast<std::size_t>(state.epoch)], spec_);
    const auto report = milp::solve_single_stage(model, *backend_, settings_.limits, spec_);
    return finish(state, report.solution.has_solution(), report.decision, report.gap, report.solution.seconds);
}

NnVfaPolicy::NnVfaPolicy(InstanceSpec spec, MlpVFA vfa, SolverSettings settings)
    : SolverPolicy(std::move(spec), std::move(settings)), vfa_(std::move(vfa)), folded_(vfa_.folded()) {
    if (folded_.input_size() != 2 + 3 * spec_.num_districts())
        throw ValidationError("vfa", "network input size does not match the instance");
}

Decision NnVfaPolicy::decide(const State& state, Rng&) {
    if (state.epoch >= spec_.horizon) {
        info_ = {};
        return Decision(spec_.num_districts(), spec_.num_modes());
    }
    const auto model = milp::build_single_stage_nn(state, folded_, spec_);
    const auto report = milp::solve_single_stage(model, *backend_, settings_.limits, spec_);
    return finish(state, report.solution.has_solution(), report.decision, report.gap, report.solution.seconds);
}

ReoptimizationPolicy::ReoptimizationPolicy(InstanceSpec spec, SolverSettings settings, bool margin)
    : SolverPolicy(std::move(spec), std::move(settings)), margin_(margin) {}

Decision ReoptimizationPolicy::decide(const State& state, Rng&) {
    if (state.epoch >= spec_.horizon) {
        info_ = {};
        return Decision(spec_.num_districts(), spec_.num_modes());
    }
    const auto model = milp::build_multiperiod(state, spec_, milp::expected_events(state, spec_, margin_));
    const auto report = milp::solve_multiperiod(model, *backend_, settings_.limits, spec_);
    Decision first = report.has_schedule() ? report.decisions.front() : Decision{};
    return finish(state, report.has_schedule(), std::move(first), report.gap, report.seconds);
}

milp::ScheduleReport perfect_information(const SamplePath& path, const InstanceSpec& spec,
                                         milp::SolverBackend& backend, const milp::SolveLimits& limits) {
    if (static_cast<int>(path.events.size()) != spec.horizon + 1)
        throw ValidationError("path", "expected " + std::to_string(spec.horizon + 1) + " events");
    const State s0 = initial_state(spec, path.events.front());
    const std::vector<ExogenousEvent> future(path.events.begin() + 1, path.events.end());
    return milp::solve_multiperiod(milp::build_multiperiod(s0, spec, future), backend, limits, spec);
}

PerfectInformationPolicy::PerfectInformationPolicy(InstanceSpec spec, SolverSettings settings)
    : SolverPolicy(std::move(spec), std::move(settings)) {}

void PerfectInformationPolicy::begin_episode(const SamplePath& path) {
    const auto report = perfect_information(path, spec_, *backend_, settings_.limits);
    schedule_ = report.decisions;
    objective_ = report.objective;
    bound_ = report.bound;
    gap_ = report.gap;
    seconds_ = report.seconds;
}

Decision PerfectInformationPolicy::decide(const State& state, Rng&) {
    if (state.epoch >= spec_.horizon) {
        info_ = {};
        return Decision(spec_.num_districts(), spec_.num_modes());
    }
    const bool have = static_cast<std::size_t>(state.epoch) < schedule_.size();
    // the whole schedule comes from one solve; charge its time to epoch 0
    return finish(state, have, have ? schedule_[static_cast<std::size_t>(state.epoch)] : Decision{}, gap_,
                  state.epoch == 0 ? seconds_ : 0.0);
}

}  // namespace relief
