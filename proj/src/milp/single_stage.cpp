#include "relief/milp/single_stage.hpp"

#include <algorithm>
#include <cmath>

#include "relief/error.hpp"

namespace relief::milp {

namespace {

// Allocation, vehicle and expected-shortage structure shared by both VFAs.
SingleStageModel build_flow(const State& state, const InstanceSpec& spec) {
    if (state.districts.size() != static_cast<std::size_t>(spec.num_districts()))
        throw ValidationError("state", "state does not match the instance");
    SingleStageModel m;
    m.epoch = state.epoch;
    const int n_districts = spec.num_districts();
    const int n_modes = spec.num_modes();
    const bool terminal = state.epoch >= spec.horizon;
    const auto cw = static_cast<double>(std::max<Units>(0, state.cw_inventory));
    const double alloc_ub = terminal ? 0.0 : cw;

    m.cw_post = LinExpr(cw);
    LinExpr total_alloc;
    for (int n = 0; n < n_districts; ++n) {
        const auto& d = state.districts[static_cast<std::size_t>(n)];
        m.alloc.emplace_back();
        m.vehicles.emplace_back();
        m.encoding.vehicle_count_upper.emplace_back();
        LinExpr inv(static_cast<double>(d.inventory));
        for (int k = 0; k < n_modes; ++k) {
            const auto& mode = spec.modes[static_cast<std::size_t>(k)];
            const std::string tag = std::to_string(n) + "_" + to_string(mode.kind);
            const double vmax = std::ceil(alloc_ub / static_cast<double>(mode.capacity));
            Var x = m.model.add_integer(0.0, alloc_ub, "x_" + tag);
            Var v = m.model.add_integer(0.0, vmax, "v_" + tag);
            m.model.add_le(LinExpr(x), static_cast<double>(mode.capacity) * LinExpr(v), "cap_" + tag);
            m.transport.add(v, spec.transport_cost[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)]);
            inv.add(x, 1.0);
            total_alloc.add(x, 1.0);
            m.alloc.back().push_back(x);
            m.vehicles.back().push_back(v);
            m.encoding.vehicle_count_upper.back().push_back(vmax);
        }
        m.inventory_post.push_back(inv);
        m.constant_cost += district_deprivation_cost(state, n, spec);
    }
    m.model.add_le(total_alloc, LinExpr(cw), "cw");
    m.cw_post.add(total_alloc, -1.0);

    for (int n = 0; n < n_districts; ++n) {
        const auto& d = state.districts[static_cast<std::size_t>(n)];
        const std::string tag = std::to_string(n);
        // residual r = d + xi - I^x ranges over [r_hi - cw, r_hi]
        const double target = d.demand_forecast + 2.0 * d.forecast_std;
        const double r_hi = target - static_cast<double>(d.inventory);
        const double r_lo = r_hi - alloc_ub;
        const double m_pos = std::max(0.0, r_hi);
        const double m_neg = std::max(0.0, -r_lo);
        const LinExpr residual = LinExpr(target) - m.inventory_post[static_cast<std::size_t>(n)];
        Var h = m.model.add_continuous(0.0, m_pos, "hbar_" + tag);
        Var z = m.model.add_binary("zh_" + tag);
        m.model.add_ge(LinExpr(h), residual, "hbar_lo_" + tag);
        m.model.add_le(LinExpr(h), residual + m_neg * (LinExpr(1.0) - LinExpr(z)), "hbar_hi_" + tag);
        m.model.add_le(LinExpr(h), m_pos * LinExpr(z), "hbar_on_" + tag);
        m.expected_shortage.push_back(h);
        m.shortage_active.push_back(z);
        m.encoding.shortage_bigM.push_back(std::max(m_pos, m_neg));
        const double g_next = marginal_deprivation_cost(d.deprivation_time + 1, spec.deprivation_rate);
        m.expected_deprivation.push_back(g_next * LinExpr(h));
    }
    return m;
}

double widen(double v) { return 1e-7 * (1.0 + std::abs(v)); }

}  // namespace

std::vector<Interval> feature_box(const State& state, const InstanceSpec& spec) {
    const auto cw = static_cast<double>(std::max<Units>(0, state.cw_inventory));
    const double alloc_ub = state.epoch >= spec.horizon ? 0.0 : cw;
    std::vector<Interval> box;
    box.push_back({static_cast<double>(state.epoch), static_cast<double>(state.epoch)});
    box.push_back({cw - alloc_ub, cw});
    for (const auto& d : state.districts) {
        const auto inv = static_cast<double>(d.inventory);
        const double g_next = marginal_deprivation_cost(d.deprivation_time + 1, spec.deprivation_rate);
        const double r_hi = d.demand_forecast + 2.0 * d.forecast_std - inv;
        box.push_back({inv, inv + alloc_ub});
        box.push_back({static_cast<double>(d.deprivation_time), static_cast<double>(d.deprivation_time)});
        box.push_back({g_next * std::max(0.0, r_hi - alloc_ub), g_next * std::max(0.0, r_hi)});
    }
    return box;
}

SingleStageModel build_single_stage_dl(const State& state, std::span<const DistrictWeights> weights,
                                       const InstanceSpec& spec) {
    if (weights.size() != static_cast<std::size_t>(spec.num_districts()))
        throw ValidationError("weights", "expected one weight vector per district for epoch " +
                                             std::to_string(state.epoch));
    SingleStageModel m = build_flow(state, spec);
    for (int n = 0; n < spec.num_districts(); ++n) {
        const auto& w = weights[static_cast<std::size_t>(n)];
        for (double c : w)
            if (!std::isfinite(c)) throw ValidationError("weights", "non-finite weight");
        const auto& d = state.districts[static_cast<std::size_t>(n)];
        m.value.add_constant(w[0] + w[2] * static_cast<double>(d.deprivation_time));
        m.value.add(m.inventory_post[static_cast<std::size_t>(n)], w[1]);
        m.value.add(m.expected_deprivation[static_cast<std::size_t>(n)], w[3]);
    }
    m.model.minimize(m.transport);
    m.model.minimize(m.value);
    return m;
}

SingleStageModel build_single_stage_nn(const State& state, const ReluNetwork& network, const InstanceSpec& spec) {
    const int n_inputs = 2 + 3 * spec.num_districts();
    if (network.input_size() != n_inputs)
        throw ValidationError("network", "input layer has " + std::to_string(network.input_size()) +
                                             " features, the instance needs " + std::to_string(n_inputs));
    if (network.layers.back().weights.rows() != 1) throw ValidationError("network", "output layer must be scalar");
    SingleStageModel m = build_flow(state, spec);

    std::vector<LinExpr> inputs;
    inputs.emplace_back(static_cast<double>(state.epoch));
    inputs.push_back(m.cw_post);
    for (int n = 0; n < spec.num_districts(); ++n) {
        inputs.push_back(m.inventory_post[static_cast<std::size_t>(n)]);
        inputs.emplace_back(static_cast<double>(state.districts[static_cast<std::size_t>(n)].deprivation_time));
        inputs.push_back(m.expected_deprivation[static_cast<std::size_t>(n)]);
    }
    const auto box = feature_box(state, spec);
    const ReluBounds bounds = derive_relu_bounds(network, box);

    for (std::size_t l = 0; l + 1 < network.layers.size(); ++l) {
        const auto& layer = network.layers[l];
        std::vector<LinExpr> outputs;
        m.encoding.relu_lower.emplace_back();
        m.encoding.relu_upper.emplace_back();
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
            const std::string tag = std::to_string(l) + "_" + std::to_string(i);
            LinExpr pre(layer.bias(i));
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
                pre.add(inputs[static_cast<std::size_t>(j)], layer.weights(i, j));
            const auto& iv = bounds.layers[l][static_cast<std::size_t>(i)];
            const double lo = iv.lower - widen(iv.lower);
            const double hi = iv.upper + widen(iv.upper);
            m.encoding.relu_lower.back().push_back(lo);
            m.encoding.relu_upper.back().push_back(hi);
            if (hi <= 0.0) {
                outputs.emplace_back(0.0);  // never active
                continue;
            }
            Var out = m.model.add_continuous(0.0, hi, "m_" + tag);
            if (lo >= 0.0) {
                m.model.add_eq(LinExpr(out), pre, "relu_lin_" + tag);  // always active
            } else {
                Var z = m.model.add_binary("z_" + tag);
                m.model.add_ge(LinExpr(out), pre, "relu_lo_" + tag);
                m.model.add_le(LinExpr(out), pre - lo * (LinExpr(1.0) - LinExpr(z)), "relu_hi_" + tag);
                m.model.add_le(LinExpr(out), hi * LinExpr(z), "relu_on_" + tag);
            }
            outputs.emplace_back(out);
        }
        m.neurons.push_back(outputs);
        inputs = std::move(outputs);
    }
    const auto& head = network.layers.back();
    m.value = LinExpr(head.bias(0));
    for (Eigen::Index j = 0; j < head.weights.cols(); ++j) m.value.add(inputs[static_cast<std::size_t>(j)], head.weights(0, j));
    m.model.minimize(m.transport);
    m.model.minimize(m.value);
    return m;
}

void fix_decision(SingleStageModel& m, const Decision& decision) {
    for (std::size_t n = 0; n < m.alloc.size(); ++n)
        for (std::size_t k = 0; k < m.alloc[n].size(); ++k)
            m.model.fix(m.alloc[n][k], static_cast<double>(decision(static_cast<int>(n), static_cast<int>(k))));
}

Decision extract_decision(const SingleStageModel& m, const Solution& solution, const InstanceSpec& spec) {
    Decision decision(spec.num_districts(), spec.num_modes());
    for (int n = 0; n < spec.num_districts(); ++n)
        for (int k = 0; k < spec.num_modes(); ++k) {
            const double v = solution.value(m.alloc[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)]);
            const double r = std::round(v);
            if (std::abs(v - r) > 1e-6)
                throw SolverError("allocation " + std::to_string(v) + " is not integral within 1e-6");
            decision(n, k) = static_cast<Units>(r);
        }
    return decision;
}

SingleStageReport solve_single_stage(const SingleStageModel& m, SolverBackend& backend, const SolveLimits& limits,
                                     const InstanceSpec& spec) {
    SingleStageReport report;
    report.solution = backend.solve(m.model, limits);
    report.status = report.solution.status;
    if (report.solution.has_solution()) {
        report.decision = extract_decision(m, report.solution, spec);
        report.objective = report.solution.objective;
        report.gap = report.solution.gap;
    }
    return report;
}

}  // namespace relief::milp
