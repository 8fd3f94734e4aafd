#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace relief {

/// Supply units, individuals and allocations are all whole units.
using Units = std::int64_t;

inline constexpr double kDefaultDeprivationRate = 0.065;

enum class ModeKind { Uav, Truck };

struct Mode {
    std::string name;
    ModeKind kind = ModeKind::Truck;
    Units capacity = 1;

    bool operator==(const Mode&) const = default;
};

/// Static problem data.
///
/// Epochs run 0..horizon. Demand is indexed by period p = 1..horizon, the
/// interval [p-1, p), and stored at `demand_mean[p - 1]`. Supply arriving at
/// epoch t (t = 0 is the initial stock) is `supply_mean[t]`.
struct InstanceSpec {
    std::string name;
    std::vector<std::string> district_names;
    std::vector<Mode> modes;                          // ordered UAV before truck
    std::vector<std::vector<double>> transport_cost;  // [district][mode], per dispatched vehicle
    int horizon = 30;
    double period_hours = 6.0;
    std::vector<std::vector<double>> demand_mean;  // [period - 1][district]
    double demand_cov = 0.2;
    std::vector<double> supply_mean;  // [epoch], size horizon + 1
    double supply_cov = 0.2;
    double deprivation_rate = kDefaultDeprivationRate;

    int num_districts() const noexcept { return static_cast<int>(district_names.size()); }
    int num_modes() const noexcept { return static_cast<int>(modes.size()); }

    /// Mean demand of period p (1-based); zero outside 1..horizon.
    double period_demand(int period, int district) const;

    /// Index of the mode of this kind, or -1.
    int mode_index(ModeKind kind) const noexcept;

    /// Throws ValidationError naming the first offending field.
    void validate() const;

    bool operator==(const InstanceSpec&) const = default;
};

struct DistrictState {
    Units inventory = 0;
    Units shortage = 0;
    int deprivation_time = 0;
    double demand_forecast = 0.0;  // expected demand of the upcoming period
    double forecast_std = 0.0;

    bool operator==(const DistrictState&) const = default;
};

/// Pre-decision state S_t.
struct State {
    int epoch = 0;
    Units cw_inventory = 0;
    std::vector<DistrictState> districts;

    bool operator==(const State&) const = default;
};

/// State right after the decision and before new information arrives.
/// `districts[n].inventory` holds the post-decision inventory.
struct PostDecisionState {
    int epoch = 0;
    Units cw_inventory = 0;
    std::vector<DistrictState> districts;

    bool operator==(const PostDecisionState&) const = default;
};

/// Allocation x[n][k] in supply units.
class Decision {
public:
    Decision() = default;
    Decision(int districts, int modes)
        : districts_(districts), modes_(modes), units_(static_cast<std::size_t>(districts * modes), 0) {}

    int districts() const noexcept { return districts_; }
    int modes() const noexcept { return modes_; }

    Units& operator()(int n, int k) { return units_[index(n, k)]; }
    Units operator()(int n, int k) const { return units_[index(n, k)]; }

    Units district_total(int n) const;
    Units total() const;
    bool empty() const;

    /// ceil(alloc / capacity) per (district, mode).
    Units vehicles(int n, int k, const InstanceSpec& spec) const;

    std::span<const Units> raw() const noexcept { return units_; }

    bool operator==(const Decision&) const = default;

private:
    std::size_t index(int n, int k) const noexcept { return static_cast<std::size_t>(n * modes_ + k); }

    int districts_ = 0;
    int modes_ = 0;
    std::vector<Units> units_;
};

/// Exogenous information W_t.
struct ExogenousEvent {
    Units supply_arrival = 0;
    std::vector<Units> realized_demand;   // demand of the period that just ended
    std::vector<double> next_forecast;    // expected demand of the coming period
    std::vector<double> next_forecast_std;

    bool operator==(const ExogenousEvent&) const = default;
};

struct FeatureVector {
    /// (post-decision inventory, deprivation time, expected deprivation cost) per district.
    std::vector<std::array<double, 3>> linear;
    /// (epoch, cw inventory, then the linear triple of every district).
    std::vector<double> neural;
    /// Safety margin added to the demand forecast, 2 * forecast std.
    std::vector<double> forecast_margin;
};

/// gamma(delta) = e^(rate * delta) - 1, clamped to 0 for negative delta.
double deprivation_cost(int delta, double rate = kDefaultDeprivationRate);

/// g(delta) = max(0, gamma(delta) - gamma(delta - 1)).
double marginal_deprivation_cost(int delta, double rate = kDefaultDeprivationRate);

/// Throws FeasibilityError unless the decision is admissible in `state`.
void check_feasible(const State& state, const Decision& decision, const InstanceSpec& spec);

/// Transport cost of a decision, split by mode kind.
struct TransportCost {
    double uav = 0.0;
    double truck = 0.0;
    double total() const noexcept { return uav + truck; }
};
TransportCost transport_cost(const Decision& decision, const InstanceSpec& spec);

/// Deprivation charged in `state` for district n: g(delta) * h.
double district_deprivation_cost(const State& state, int district, const InstanceSpec& spec);

/// Direct cost C(S_t, x_t). At the terminal epoch only deprivation is charged
/// and the decision must be empty.
double direct_cost(const State& state, const Decision& decision, const InstanceSpec& spec);

/// Direct cost attributed to each district (deprivation plus its transport).
std::vector<double> district_direct_costs(const State& state, const Decision& decision,
                                          const InstanceSpec& spec);

PostDecisionState apply_decision(const State& state, const Decision& decision, const InstanceSpec& spec);

/// S_{t+1} from the post-decision state and W_{t+1}.
State advance(const PostDecisionState& post, const ExogenousEvent& event);

/// Zero inventories, shortages and deprivation; CW stock and forecasts from W_0.
State initial_state(const InstanceSpec& spec, const ExogenousEvent& first);

/// max(0, forecast + 2 sigma - post-decision inventory).
double expected_shortage(const PostDecisionState& post, int district);

FeatureVector extract_features(const PostDecisionState& post, double rate = kDefaultDeprivationRate);

std::string to_string(ModeKind kind);
ModeKind mode_kind_from_string(const std::string& text);

}  // namespace relief
