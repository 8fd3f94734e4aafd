#include "relief/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "relief/error.hpp"

namespace relief {

double InstanceSpec::period_demand(int period, int district) const {
    if (period < 1 || period > static_cast<int>(demand_mean.size())) return 0.0;
    return demand_mean[static_cast<std::size_t>(period - 1)][static_cast<std::size_t>(district)];
}

int InstanceSpec::mode_index(ModeKind kind) const noexcept {
    for (int k = 0; k < num_modes(); ++k)
        if (modes[static_cast<std::size_t>(k)].kind == kind) return k;
    return -1;
}

void InstanceSpec::validate() const {
    const int n_districts = num_districts();
    if (n_districts < 1) throw ValidationError("districts", "at least one district is required");
    if (modes.empty() || modes.size() > 2) throw ValidationError("modes", "one or two transport modes are required");
    if (modes.size() == 2 && modes[0].kind == modes[1].kind)
        throw ValidationError("modes", "duplicate transport mode");
    for (const auto& mode : modes)
        if (mode.capacity <= 0) throw ValidationError("capacity", "vehicle capacity must be positive");
    if (horizon < 1) throw ValidationError("horizon", "horizon must be at least 1");
    if (!(period_hours > 0.0)) throw ValidationError("period_hours", "period length must be positive");
    if (transport_cost.size() != district_names.size())
        throw ValidationError("transport_cost", "one cost row per district is required");
    for (const auto& row : transport_cost) {
        if (row.size() != modes.size()) throw ValidationError("transport_cost", "one cost per mode is required");
        for (double c : row)
            if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("transport_cost", "costs must be finite and >= 0");
    }
    if (demand_mean.size() != static_cast<std::size_t>(horizon))
        throw ValidationError("demand_mean", "one demand row per period is required");
    for (const auto& row : demand_mean) {
        if (row.size() != district_names.size())
            throw ValidationError("demand_mean", "one demand per district is required");
        for (double d : row)
            if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("demand_mean", "demand must be finite and >= 0");
    }
    if (supply_mean.size() != static_cast<std::size_t>(horizon + 1))
        throw ValidationError("supply_mean", "one supply mean per epoch is required");
    for (double s : supply_mean)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("supply_mean", "supply must be finite and >= 0");
    if (!(demand_cov >= 0.0)) throw ValidationError("cov", "coefficient of variation must be >= 0");
    if (!(supply_cov >= 0.0)) throw ValidationError("supply_cov", "coefficient of variation must be >= 0");
    if (!(deprivation_rate > 0.0)) throw ValidationError("deprivation_rate", "rate must be positive");
}

Units Decision::district_total(int n) const {
    Units sum = 0;
    for (int k = 0; k < modes_; ++k) sum += (*this)(n, k);
    return sum;
}

Units Decision::total() const { return std::accumulate(units_.begin(), units_.end(), Units{0}); }

bool Decision::empty() const {
    return std::all_of(units_.begin(), units_.end(), [](Units u) { return u == 0; });
}

Units Decision::vehicles(int n, int k, const InstanceSpec& spec) const {
    const Units load = (*this)(n, k);
    const Units cap = spec.modes[static_cast<std::size_t>(k)].capacity;
    return (load + cap - 1) / cap;
}

double deprivation_cost(int delta, double rate) {
    if (delta < 0) return 0.0;
    return std::expm1(rate * delta);
}

double marginal_deprivation_cost(int delta, double rate) {
    return std::max(0.0, deprivation_cost(delta, rate) - deprivation_cost(delta - 1, rate));
}

void check_feasible(const State& state, const Decision& decision, const InstanceSpec& spec) {
    if (decision.districts() != spec.num_districts() || decision.modes() != spec.num_modes())
        throw FeasibilityError("decision shape does not match the instance (" + std::to_string(decision.districts()) +
                               "x" + std::to_string(decision.modes()) + ")");
    if (state.districts.size() != static_cast<std::size_t>(spec.num_districts()))
        throw FeasibilityError("state does not match the instance");
    for (Units u : decision.raw())
        if (u < 0) throw FeasibilityError("negative allocation");
    if (state.epoch >= spec.horizon && !decision.empty())
        throw FeasibilityError("no allocation is allowed at the terminal epoch");
    if (decision.total() > state.cw_inventory)
        throw FeasibilityError("allocation of " + std::to_string(decision.total()) + " exceeds CW inventory " +
                               std::to_string(state.cw_inventory) + " at epoch " + std::to_string(state.epoch));
}

TransportCost transport_cost(const Decision& decision, const InstanceSpec& spec) {
    TransportCost cost;
    for (int n = 0; n < decision.districts(); ++n) {
        for (int k = 0; k < decision.modes(); ++k) {
            const double c = static_cast<double>(decision.vehicles(n, k, spec)) *
                             spec.transport_cost[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
            if (spec.modes[static_cast<std::size_t>(k)].kind == ModeKind::Uav)
                cost.uav += c;
            else
                cost.truck += c;
        }
    }
    return cost;
}

double district_deprivation_cost(const State& state, int district, const InstanceSpec& spec) {
    const auto& d = state.districts[static_cast<std::size_t>(district)];
    return marginal_deprivation_cost(d.deprivation_time, spec.deprivation_rate) * static_cast<double>(d.shortage);
}

std::vector<double> district_direct_costs(const State& state, const Decision& decision, const InstanceSpec& spec) {
    check_feasible(state, decision, spec);
    std::vector<double> costs(state.districts.size(), 0.0);
    for (int n = 0; n < spec.num_districts(); ++n) {
        double c = district_deprivation_cost(state, n, spec);
        for (int k = 0; k < spec.num_modes(); ++k)
            c += static_cast<double>(decision.vehicles(n, k, spec)) *
                 spec.transport_cost[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
        costs[static_cast<std::size_t>(n)] = c;
    }
    return costs;
}

double direct_cost(const State& state, const Decision& decision, const InstanceSpec& spec) {
    const auto costs = district_direct_costs(state, decision, spec);
    return std::accumulate(costs.begin(), costs.end(), 0.0);
}

PostDecisionState apply_decision(const State& state, const Decision& decision, const InstanceSpec& spec) {
    check_feasible(state, decision, spec);
    PostDecisionState post{state.epoch, state.cw_inventory - decision.total(), state.districts};
    for (int n = 0; n < decision.districts(); ++n)
        post.districts[static_cast<std::size_t>(n)].inventory += decision.district_total(n);
    return post;
}

State advance(const PostDecisionState& post, const ExogenousEvent& event) {
    State next{post.epoch + 1, post.cw_inventory + event.supply_arrival, post.districts};
    for (std::size_t n = 0; n < next.districts.size(); ++n) {
        auto& d = next.districts[n];
        const Units available = post.districts[n].inventory;
        const Units demand = event.realized_demand[n];
        d.inventory = std::max<Units>(0, available - demand);
        d.shortage = std::max<Units>(0, demand - available);
        d.deprivation_time = available <= demand ? post.districts[n].deprivation_time + 1 : 0;
        d.demand_forecast = event.next_forecast[n];
        d.forecast_std = event.next_forecast_std[n];
    }
    return next;
}

State initial_state(const InstanceSpec& spec, const ExogenousEvent& first) {
    State s{0, first.supply_arrival, std::vector<DistrictState>(static_cast<std::size_t>(spec.num_districts()))};
    for (std::size_t n = 0; n < s.districts.size(); ++n) {
        s.districts[n].demand_forecast = first.next_forecast[n];
        s.districts[n].forecast_std = first.next_forecast_std[n];
    }
    return s;
}

double expected_shortage(const PostDecisionState& post, int district) {
    const auto& d = post.districts[static_cast<std::size_t>(district)];
    return std::max(0.0, d.demand_forecast + 2.0 * d.forecast_std - static_cast<double>(d.inventory));
}

FeatureVector extract_features(const PostDecisionState& post, double rate) {
    FeatureVector f;
    const std::size_t n_districts = post.districts.size();
    f.linear.reserve(n_districts);
    f.forecast_margin.reserve(n_districts);
    f.neural.reserve(2 + 3 * n_districts);
    f.neural.push_back(static_cast<double>(post.epoch));
    f.neural.push_back(static_cast<double>(post.cw_inventory));
    for (std::size_t n = 0; n < n_districts; ++n) {
        const auto& d = post.districts[n];
        const double g_next = marginal_deprivation_cost(d.deprivation_time + 1, rate);
        const double expected_depr = g_next * expected_shortage(post, static_cast<int>(n));
        f.linear.push_back({static_cast<double>(d.inventory), static_cast<double>(d.deprivation_time), expected_depr});
        f.forecast_margin.push_back(2.0 * d.forecast_std);
        f.neural.insert(f.neural.end(), f.linear.back().begin(), f.linear.back().end());
    }
    return f;
}

std::string to_string(ModeKind kind) { return kind == ModeKind::Uav ? "uav" : "truck"; }

ModeKind mode_kind_from_string(const std::string& text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "uav" || lower == "drone") return ModeKind::Uav;
    if (lower == "truck") return ModeKind::Truck;
    throw ValidationError("modes.name", "unknown transport mode '" + text + "'");
}

}  // namespace relief
