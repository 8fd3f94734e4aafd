#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relief/domain.hpp"

namespace relief {

enum class DemandPattern { Stationary, LogisticDecreasing, LogisticIncreasing, ExplicitTable };

std::string to_string(DemandPattern pattern);
DemandPattern demand_pattern_from_string(const std::string& text);

struct ScenarioConfig {
    DemandPattern pattern = DemandPattern::Stationary;
    double cov = 0.2;
    bool uav_enabled = true;
    bool truck_enabled = true;
    std::uint64_t seed = 0;

    bool operator==(const ScenarioConfig&) const = default;
};

/// One realization omega = (W_0, ..., W_T).
struct SamplePath {
    std::uint64_t seed = 0;
    std::vector<ExogenousEvent> events;

    bool operator==(const SamplePath&) const = default;
};

/// Names accepted by builtin_instance, in listing order.
std::vector<std::string> builtin_names();

/// Tabulated instances: districts-1 .. districts-6, nepal and the districts-3
/// variants (trucks-only, low-cov, high-cov, demand-decreasing, demand-increasing).
InstanceSpec builtin_instance(std::string_view name);
ScenarioConfig builtin_scenario(std::string_view name);

/// S-curve demand table [period][district] moving from start_frac * base to
/// end_frac * base over T periods. Values are rounded half-up to whole units.
std::vector<std::vector<double>> logistic_demand_table(std::span<const double> base, double start_frac,
                                                       double end_frac, int periods);

/// Average total demand per period, the "balanced" supply rate.
double balanced_supply(const InstanceSpec& spec);

/// Build an instance from static district data and a scenario.
struct DistrictData {
    std::string name;
    double demand = 0.0;
    double uav_cost = 0.0;
    double truck_cost = 0.0;
};
InstanceSpec make_instance(std::string name, std::span<const DistrictData> districts, const ScenarioConfig& scenario,
                           int horizon = 30);

/// Deterministic in (spec, seed). Each draw comes from a substream keyed by
/// (seed, epoch, district, quantity) so districts can be sampled in any order.
SamplePath generate_path(const InstanceSpec& spec, std::uint64_t seed);

/// Path whose realizations equal the configured means (rounded).
SamplePath mean_path(const InstanceSpec& spec);

/// Instance file I/O; see docs/formats.md for the schema.
std::pair<InstanceSpec, ScenarioConfig> load_instance(const std::filesystem::path& path);
std::pair<InstanceSpec, ScenarioConfig> parse_instance(std::string_view json_text);
std::string instance_to_json(const InstanceSpec& spec, const ScenarioConfig& scenario);
void save_instance(const std::filesystem::path& path, const InstanceSpec& spec, const ScenarioConfig& scenario);

/// Built-in name or a path to an instance file.
std::pair<InstanceSpec, ScenarioConfig> resolve_instance(const std::string& name_or_path);

}  // namespace relief
