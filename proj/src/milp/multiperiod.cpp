#include "relief/milp/multiperiod.hpp"

#include <algorithm>
#include <cmath>

#include "relief/error.hpp"

namespace relief::milp {

MultiPeriodModel build_multiperiod(const State& state0, const InstanceSpec& spec,
                                   const std::vector<ExogenousEvent>& future) {
    const int t0 = state0.epoch;
    const int horizon = std::max(0, spec.horizon - t0);
    if (future.size() < static_cast<std::size_t>(horizon))
        throw ValidationError("path", "need " + std::to_string(horizon) + " future events, got " +
                                          std::to_string(future.size()));
    if (state0.cw_inventory < 0) throw ValidationError("state", "negative CW inventory");
    const int n_districts = spec.num_districts();
    const int n_modes = spec.num_modes();

    MultiPeriodModel m;
    m.start_epoch = t0;
    for (int n = 0; n < n_districts; ++n) m.constant_cost += district_deprivation_cost(state0, n, spec);

    // Running upper bounds: stock that can have reached the CW / district n by epoch t.
    double supply_bound = static_cast<double>(state0.cw_inventory);
    std::vector<double> inv_bound(static_cast<std::size_t>(n_districts));
    std::vector<LinExpr> inventory(static_cast<std::size_t>(n_districts));
    std::vector<std::vector<std::pair<int, LinExpr>>> levels(static_cast<std::size_t>(n_districts));
    for (int n = 0; n < n_districts; ++n) {
        const auto& d = state0.districts[static_cast<std::size_t>(n)];
        inventory[static_cast<std::size_t>(n)] = LinExpr(static_cast<double>(d.inventory));
        inv_bound[static_cast<std::size_t>(n)] = static_cast<double>(d.inventory);
        levels[static_cast<std::size_t>(n)] = {{d.deprivation_time, LinExpr(1.0)}};
    }
    LinExpr cw(static_cast<double>(state0.cw_inventory));

    // Units still useful to district n from epoch t0 + j on: enough to cover
    // every remaining period. Shipping more never lowers the cost, so it is a
    // valid cap that also tightens the vehicle links.
    std::vector<std::vector<double>> useful(static_cast<std::size_t>(horizon) + 1,
                                            std::vector<double>(static_cast<std::size_t>(n_districts), 1.0));
    for (int j = horizon - 1; j >= 0; --j)
        for (int n = 0; n < n_districts; ++n)
            useful[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)] =
                useful[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(n)] +
                static_cast<double>(std::max<Units>(0, future[static_cast<std::size_t>(j)].realized_demand[static_cast<std::size_t>(n)]));

    for (int j = 0; j < horizon; ++j) {
        const int t = t0 + j;
        const auto& event = future[static_cast<std::size_t>(j)];
        const std::string ep = std::to_string(t);
        m.alloc.emplace_back();
        m.vehicles.emplace_back();
        m.coverage.emplace_back();
        m.inventory.emplace_back();
        m.shortage.emplace_back();
        m.levels.emplace_back();
        LinExpr total;
        for (int n = 0; n < n_districts; ++n) {
            const std::string tag = ep + "_" + std::to_string(n);
            m.alloc.back().emplace_back();
            m.vehicles.back().emplace_back();
            LinExpr post = inventory[static_cast<std::size_t>(n)];
            LinExpr shipped;
            const double cap = std::min(supply_bound, useful[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)]);
            for (int k = 0; k < n_modes; ++k) {
                const auto& mode = spec.modes[static_cast<std::size_t>(k)];
                const std::string mtag = tag + "_" + to_string(mode.kind);
                const double q = static_cast<double>(mode.capacity);
                Var x = m.model.add_integer(0.0, cap, "x_" + mtag);
                Var v = m.model.add_integer(0.0, std::ceil(cap / q), "v_" + mtag);
                m.model.add_le(LinExpr(x), q * LinExpr(v), "cap_" + mtag);
                // one vehicle never needs to carry more than the cap
                if (cap < q) m.model.add_le(LinExpr(x), cap * LinExpr(v), "capx_" + mtag);
                shipped.add(x, 1.0);
                m.transport.add(v, spec.transport_cost[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)]);
                post.add(x, 1.0);
                total.add(x, 1.0);
                m.alloc.back().back().push_back(x);
                m.vehicles.back().back().push_back(v);
            }
            if (n_modes > 1) m.model.add_le(shipped, cap, "useful_" + tag);
            inv_bound[static_cast<std::size_t>(n)] += cap;

            // transition to t + 1
            const double demand = static_cast<double>(std::max<Units>(0, event.realized_demand[static_cast<std::size_t>(n)]));
            const double ub = inv_bound[static_cast<std::size_t>(n)];
            const double surplus_max = std::max(0.0, ub - demand);
            Var y = m.model.add_binary("y_" + tag);
            if (surplus_max == 0.0) m.model.fix(y, 0.0);
            m.model.add_ge(post, (demand + 1.0) * LinExpr(y), "cov_on_" + tag);
            m.model.add_le(post, LinExpr(demand) + surplus_max * LinExpr(y), "cov_off_" + tag);
            Var next = m.model.add_continuous(0.0, surplus_max, "I_" + std::to_string(t + 1) + "_" + std::to_string(n));
            m.model.add_ge(LinExpr(next), post - LinExpr(demand), "inv_lo_" + tag);
            m.model.add_le(LinExpr(next), post - LinExpr(demand) + demand * (LinExpr(1.0) - LinExpr(y)),
                           "inv_hi_" + tag);
            m.model.add_le(LinExpr(next), surplus_max * LinExpr(y), "inv_on_" + tag);
            const LinExpr shortage = LinExpr(demand) - post + LinExpr(next);

            // deprivation levels at t + 1: 0 when covered, otherwise one more than at t
            std::vector<std::pair<int, LinExpr>> next_levels{{0, LinExpr(y)}};
            LinExpr one_hot(y);
            LinExpr split;
            std::vector<std::pair<int, Var>> level_vars{{0, y}};
            for (const auto& [tau, indicator] : levels[static_cast<std::size_t>(n)]) {
                const std::string ltag = tag + "_" + std::to_string(tau + 1);
                // continuous: once the coverage binaries are integral the
                // chain below forces every level indicator to 0 or 1
                Var z = m.model.add_continuous(0.0, 1.0, "z_" + ltag);
                m.model.add_le(LinExpr(z), indicator, "lvl_" + ltag);
                m.model.add_ge(LinExpr(z), indicator - LinExpr(y), "lvl_keep_" + ltag);
                one_hot.add(z, 1.0);
                Var h = m.model.add_continuous(0.0, demand, "h_" + ltag);
                m.model.add_le(LinExpr(h), demand * LinExpr(z), "h_on_" + ltag);
                split.add(h, 1.0);
                m.deprivation.add(h, marginal_deprivation_cost(tau + 1, spec.deprivation_rate));
                next_levels.emplace_back(tau + 1, LinExpr(z));
                level_vars.emplace_back(tau + 1, z);
            }
            m.model.add_eq(one_hot, LinExpr(1.0), "onehot_" + tag);
            m.model.add_eq(split, shortage, "hsplit_" + tag);
            levels[static_cast<std::size_t>(n)] = std::move(next_levels);
            inventory[static_cast<std::size_t>(n)] = LinExpr(next);
            inv_bound[static_cast<std::size_t>(n)] = surplus_max;
            m.coverage.back().push_back(y);
            m.inventory.back().push_back(next);
            m.shortage.back().push_back(shortage);
            m.levels.back().push_back(std::move(level_vars));
        }
        m.model.add_le(total, cw, "cw_" + ep);
        const double arrival = static_cast<double>(std::max<Units>(0, event.supply_arrival));
        Var cw_next = m.model.add_continuous(0.0, supply_bound + arrival, "cw_" + std::to_string(t + 1));
        m.model.add_eq(LinExpr(cw_next), cw - total + LinExpr(arrival), "cwbal_" + ep);
        cw = LinExpr(cw_next);
        supply_bound += arrival;
    }
    m.model.minimize(m.transport);
    m.model.minimize(m.deprivation);
    m.model.minimize(LinExpr(m.constant_cost));
    return m;
}

std::vector<ExogenousEvent> expected_events(const State& state, const InstanceSpec& spec, bool margin) {
    std::vector<ExogenousEvent> events;
    const auto n_districts = static_cast<std::size_t>(spec.num_districts());
    for (int t = state.epoch + 1; t <= spec.horizon; ++t) {
        ExogenousEvent e;
        e.supply_arrival = std::max<Units>(0, std::llround(spec.supply_mean[static_cast<std::size_t>(t)]));
        e.realized_demand.resize(n_districts);
        e.next_forecast.resize(n_districts);
        e.next_forecast_std.resize(n_districts);
        for (std::size_t n = 0; n < n_districts; ++n) {
            double demand = spec.period_demand(t, static_cast<int>(n));
            if (t == state.epoch + 1) {
                const auto& d = state.districts[n];
                demand = d.demand_forecast + (margin ? 2.0 * d.forecast_std : 0.0);
            }
            e.realized_demand[n] = std::max<Units>(0, std::llround(demand));
            e.next_forecast[n] = spec.period_demand(t + 1, static_cast<int>(n));
            e.next_forecast_std[n] = spec.demand_cov * e.next_forecast[n];
        }
        events.push_back(std::move(e));
    }
    return events;
}

ScheduleReport solve_multiperiod(const MultiPeriodModel& m, SolverBackend& backend, const SolveLimits& limits,
                                 const InstanceSpec& spec) {
    ScheduleReport report;
    const Solution sol = backend.solve(m.model, limits);
    report.status = sol.status;
    report.seconds = sol.seconds;
    if (!sol.has_solution()) {
        report.gap = kInf;
        return report;
    }
    report.objective = sol.objective;
    report.bound = sol.bound;
    report.gap = sol.gap;
    report.deprivation = m.deprivation.evaluate(sol.values) + m.constant_cost;
    for (const auto& epoch : m.alloc) {
        Decision d(spec.num_districts(), spec.num_modes());
        for (int n = 0; n < spec.num_districts(); ++n)
            for (int k = 0; k < spec.num_modes(); ++k) {
                const double v = sol.value(epoch[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)]);
                const double r = std::round(v);
                if (std::abs(v - r) > 1e-6) throw SolverError("non-integral allocation in schedule");
                d(n, k) = static_cast<Units>(r);
            }
        const auto tc = transport_cost(d, spec);
        report.transport_uav += tc.uav;
        report.transport_truck += tc.truck;
        report.decisions.push_back(std::move(d));
    }
    return report;
}

}  // namespace relief::milp
