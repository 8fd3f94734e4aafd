#include "relief/instances.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include "json.hpp"
#include <sstream>

#include "relief/error.hpp"
#include "relief/rng.hpp"

namespace relief {

using nlohmann::json;

namespace {

constexpr Units kUavCapacity = 200;
constexpr Units kTruckCapacity = 5000;

// Demand per period, UAV cost, truck cost.
const std::map<int, std::vector<DistrictData>>& district_tables() {
    static const std::map<int, std::vector<DistrictData>> tables{
        {1, {{"1", 200, 150, 900}}},
        {2, {{"1", 300, 100, 600}, {"2", 100, 200, 1200}}},
        {3, {{"1", 200, 50, 300}, {"2", 300, 150, 900}, {"3", 100, 250, 1500}}},
        {4, {{"1", 200, 50, 300}, {"2", 300, 150, 900}, {"3", 100, 200, 1200}, {"4", 150, 300, 1800}}},
        {5,
         {{"1", 200, 50, 300},
          {"2", 300, 100, 600},
          {"3", 100, 150, 900},
          {"4", 150, 200, 1200},
          {"5", 250, 250, 1500}}},
        {6,
         {{"1", 200, 50, 300},
          {"2", 300, 100, 600},
          {"3", 100, 150, 900},
          {"4", 150, 200, 1200},
          {"5", 250, 250, 1500},
          {"6", 200, 300, 1800}}},
    };
    return tables;
}

const std::vector<DistrictData>& nepal_table() {
    static const std::vector<DistrictData> table{
        {"Dolakha", 217, 202, 1256},       {"Gorkha", 305, 178, 1266},    {"Okhaldhunga", 55, 266, 1223},
        {"Sindhupalchok", 278, 108, 667},  {"Bhaktapur", 117, 26, 169},   {"Rasuwa", 49, 108, 1928},
        {"Ramechhap", 167, 214, 871},      {"Makwanpur", 156, 197, 1085}, {"Dhading", 352, 113, 731},
        {"Sindhuli", 156, 82, 683},        {"Nuwakot", 333, 67, 437},     {"Kavrepalanchok", 308, 62, 365},
        {"Lalitpur", 107, 12, 251},
    };
    return table;
}

// Progress of the 30-period S-curve in steps of 1/200, first half; the second
// half mirrors it. Reproduces the tabulated decreasing/increasing patterns.
constexpr std::array<int, 15> kSCurveSteps{0, 2, 4, 7, 10, 15, 20, 27, 34, 42, 51, 61, 72, 83, 94};
constexpr int kSCurveResolution = 200;
constexpr double kSCurveRate30 = 0.212;

std::vector<int> s_curve_steps(int periods) {
    std::vector<int> steps(static_cast<std::size_t>(periods), 0);
    if (periods == 30) {
        for (int i = 0; i < 15; ++i) {
            steps[static_cast<std::size_t>(i)] = kSCurveSteps[static_cast<std::size_t>(i)];
            steps[static_cast<std::size_t>(29 - i)] = kSCurveResolution - kSCurveSteps[static_cast<std::size_t>(i)];
        }
        return steps;
    }
    if (periods == 1) return steps;
    const double rate = kSCurveRate30 * 29.0 / static_cast<double>(periods - 1);
    const double centre = 0.5 * (periods + 1);
    auto logistic = [&](double t) { return 1.0 / (1.0 + std::exp(-rate * (t - centre))); };
    const double lo = logistic(1.0);
    const double hi = logistic(static_cast<double>(periods));
    for (int p = 1; p <= periods; ++p) {
        const double progress = (logistic(p) - lo) / (hi - lo);
        steps[static_cast<std::size_t>(p - 1)] = static_cast<int>(std::lround(progress * kSCurveResolution));
    }
    return steps;
}

struct BuiltinEntry {
    std::string name;
    int districts;  // 0 for nepal
    ScenarioConfig scenario;
};

const std::vector<BuiltinEntry>& builtin_entries() {
    static const std::vector<BuiltinEntry> entries = [] {
        std::vector<BuiltinEntry> e;
        for (int n = 1; n <= 6; ++n) e.push_back({"districts-" + std::to_string(n), n, ScenarioConfig{}});
        e.push_back({"nepal", 0, ScenarioConfig{}});
        ScenarioConfig trucks;
        trucks.uav_enabled = false;
        e.push_back({"districts-3-trucks-only", 3, trucks});
        ScenarioConfig low;
        low.cov = 0.1;
        e.push_back({"districts-3-low-cov", 3, low});
        ScenarioConfig high;
        high.cov = 0.3;
        e.push_back({"districts-3-high-cov", 3, high});
        ScenarioConfig dec;
        dec.pattern = DemandPattern::LogisticDecreasing;
        e.push_back({"districts-3-demand-decreasing", 3, dec});
        ScenarioConfig inc;
        inc.pattern = DemandPattern::LogisticIncreasing;
        e.push_back({"districts-3-demand-increasing", 3, inc});
        return e;
    }();
    return entries;
}

const BuiltinEntry& find_builtin(std::string_view name) {
    for (const auto& entry : builtin_entries())
        if (entry.name == name) return entry;
    throw ValidationError("instance", "unknown built-in instance '" + std::string(name) + "'");
}

Units sample_quantity(double mean, double cov, std::uint64_t key) {
    const double value = mean + cov * mean * standard_normal_at(key);
    return std::max<Units>(0, static_cast<Units>(std::llround(value)));
}

enum Quantity : std::uint64_t { kSupply = 0, kDemand = 1 };

}  // namespace

std::string to_string(DemandPattern pattern) {
    switch (pattern) {
        case DemandPattern::Stationary: return "stationary";
        case DemandPattern::LogisticDecreasing: return "logistic_decreasing";
        case DemandPattern::LogisticIncreasing: return "logistic_increasing";
        case DemandPattern::ExplicitTable: return "explicit_table";
    }
    return "stationary";
}

DemandPattern demand_pattern_from_string(const std::string& text) {
    for (auto p : {DemandPattern::Stationary, DemandPattern::LogisticDecreasing, DemandPattern::LogisticIncreasing,
                   DemandPattern::ExplicitTable})
        if (to_string(p) == text) return p;
    throw ValidationError("scenario.pattern", "unknown demand pattern '" + text + "'");
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> names;
    for (const auto& entry : builtin_entries()) names.push_back(entry.name);
    return names;
}

std::vector<std::vector<double>> logistic_demand_table(std::span<const double> base, double start_frac,
                                                       double end_frac, int periods) {
    const auto steps = s_curve_steps(periods);
    std::vector<std::vector<double>> table(static_cast<std::size_t>(periods), std::vector<double>(base.size()));
    for (int p = 0; p < periods; ++p) {
        for (std::size_t n = 0; n < base.size(); ++n) {
            // scaled by the resolution so that tabulated half-units are exact
            const double scaled = base[n] * start_frac * kSCurveResolution +
                                  base[n] * (end_frac - start_frac) * steps[static_cast<std::size_t>(p)];
            table[static_cast<std::size_t>(p)][n] = std::floor(scaled / kSCurveResolution + 0.5 + 1e-9);
        }
    }
    return table;
}

double balanced_supply(const InstanceSpec& spec) {
    double total = 0.0;
    for (const auto& row : spec.demand_mean)
        for (double d : row) total += d;
    return spec.demand_mean.empty() ? 0.0 : total / static_cast<double>(spec.demand_mean.size());
}

InstanceSpec make_instance(std::string name, std::span<const DistrictData> districts, const ScenarioConfig& scenario,
                           int horizon) {
    InstanceSpec spec;
    spec.name = std::move(name);
    spec.horizon = horizon;
    spec.demand_cov = scenario.cov;
    spec.supply_cov = scenario.cov;
    if (scenario.uav_enabled) spec.modes.push_back({"uav", ModeKind::Uav, kUavCapacity});
    if (scenario.truck_enabled) spec.modes.push_back({"truck", ModeKind::Truck, kTruckCapacity});
    std::vector<double> base;
    for (const auto& d : districts) {
        spec.district_names.push_back(d.name);
        std::vector<double> costs;
        if (scenario.uav_enabled) costs.push_back(d.uav_cost);
        if (scenario.truck_enabled) costs.push_back(d.truck_cost);
        spec.transport_cost.push_back(std::move(costs));
        base.push_back(d.demand);
    }
    switch (scenario.pattern) {
        case DemandPattern::LogisticDecreasing:
            spec.demand_mean = logistic_demand_table(base, 1.5, 0.5, horizon);
            break;
        case DemandPattern::LogisticIncreasing:
            spec.demand_mean = logistic_demand_table(base, 0.5, 1.5, horizon);
            break;
        default:
            spec.demand_mean.assign(static_cast<std::size_t>(horizon), base);
            break;
    }
    spec.supply_mean.assign(static_cast<std::size_t>(horizon + 1), balanced_supply(spec));
    spec.validate();
    return spec;
}

InstanceSpec builtin_instance(std::string_view name) {
    const auto& entry = find_builtin(name);
    const auto& table = entry.districts == 0 ? nepal_table() : district_tables().at(entry.districts);
    return make_instance(entry.name, table, entry.scenario);
}

ScenarioConfig builtin_scenario(std::string_view name) { return find_builtin(name).scenario; }

SamplePath generate_path(const InstanceSpec& spec, std::uint64_t seed) {
    const auto n_districts = static_cast<std::size_t>(spec.num_districts());
    SamplePath path;
    path.seed = seed;
    path.events.resize(static_cast<std::size_t>(spec.horizon + 1));
    for (int t = 0; t <= spec.horizon; ++t) {
        auto& event = path.events[static_cast<std::size_t>(t)];
        event.supply_arrival = sample_quantity(spec.supply_mean[static_cast<std::size_t>(t)], spec.supply_cov,
                                               derive_seed(seed, {static_cast<std::uint64_t>(t), 0, kSupply}));
        event.realized_demand.assign(n_districts, 0);
        event.next_forecast.assign(n_districts, 0.0);
        event.next_forecast_std.assign(n_districts, 0.0);
        for (std::size_t n = 0; n < n_districts; ++n) {
            if (t > 0)
                event.realized_demand[n] =
                    sample_quantity(spec.period_demand(t, static_cast<int>(n)), spec.demand_cov,
                                    derive_seed(seed, {static_cast<std::uint64_t>(t), n, kDemand}));
            event.next_forecast[n] = spec.period_demand(t + 1, static_cast<int>(n));
            event.next_forecast_std[n] = spec.demand_cov * event.next_forecast[n];
        }
    }
    return path;
}

SamplePath mean_path(const InstanceSpec& spec) {
    InstanceSpec deterministic = spec;
    deterministic.demand_cov = 0.0;
    deterministic.supply_cov = 0.0;
    SamplePath path = generate_path(deterministic, 0);
    // forecasts keep the configured uncertainty
    for (auto& event : path.events)
        for (std::size_t n = 0; n < event.next_forecast.size(); ++n)
            event.next_forecast_std[n] = spec.demand_cov * event.next_forecast[n];
    return path;
}

// ---------------------------------------------------------------------------
// JSON format

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& what) { throw ValidationError(field, what); }

const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) schema_error(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where.empty() ? key : where + "." + key, "missing required field '" + key + "'");
    return *it;
}

double number(const json& value, const std::string& field) {
    if (!value.is_number()) schema_error(field, "expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) schema_error(field, "expected a finite number");
    return v;
}

double nonnegative(const json& value, const std::string& field) {
    const double v = number(value, field);
    if (v < 0.0) schema_error(field, "must be >= 0");
    return v;
}

bool is_constant(const std::vector<double>& values) {
    return std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
}

std::string line_diagnostic(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::pair<InstanceSpec, ScenarioConfig> parse_instance(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError("", "parse error at " + line_diagnostic(json_text, e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) schema_error("", "top-level value must be an object");

    ScenarioConfig scenario;
    if (auto it = doc.find("scenario"); it != doc.end()) {
        const json& sc = *it;
        if (!sc.is_object()) schema_error("scenario", "expected an object");
        if (auto p = sc.find("pattern"); p != sc.end()) {
            if (!p->is_string()) schema_error("scenario.pattern", "expected a string");
            scenario.pattern = demand_pattern_from_string(p->get<std::string>());
        }
        if (auto s = sc.find("seed"); s != sc.end()) {
            if (!s->is_number_unsigned()) schema_error("scenario.seed", "expected a non-negative integer");
            scenario.seed = s->get<std::uint64_t>();
        }
    }

    InstanceSpec spec;
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) schema_error("name", "expected a string");
        spec.name = it->get<std::string>();
    } else {
        spec.name = "custom";
    }
    spec.horizon = static_cast<int>(number(require(doc, "horizon", ""), "horizon"));
    if (spec.horizon < 1) schema_error("horizon", "must be >= 1");
    spec.period_hours = nonnegative(require(doc, "period_hours", ""), "period_hours");
    spec.demand_cov = nonnegative(require(doc, "cov", ""), "cov");
    spec.supply_cov = doc.contains("supply_cov") ? nonnegative(doc["supply_cov"], "supply_cov") : spec.demand_cov;
    if (doc.contains("deprivation_rate")) spec.deprivation_rate = number(doc["deprivation_rate"], "deprivation_rate");
    scenario.cov = spec.demand_cov;

    const json& modes = require(doc, "modes", "");
    if (!modes.is_array() || modes.empty()) schema_error("modes", "expected a non-empty array");
    scenario.uav_enabled = false;
    scenario.truck_enabled = false;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const std::string where = "modes[" + std::to_string(k) + "]";
        const json& m = modes[k];
        const json& name = require(m, "name", where);
        if (!name.is_string()) schema_error(where + ".name", "expected a string");
        Mode mode;
        mode.name = name.get<std::string>();
        mode.kind = mode_kind_from_string(mode.name);
        const double cap = number(require(m, "capacity", where), where + ".capacity");
        if (cap <= 0 || cap != std::floor(cap)) schema_error(where + ".capacity", "must be a positive integer");
        mode.capacity = static_cast<Units>(cap);
        (mode.kind == ModeKind::Uav ? scenario.uav_enabled : scenario.truck_enabled) = true;
        spec.modes.push_back(mode);
    }
    std::stable_sort(spec.modes.begin(), spec.modes.end(),
                     [](const Mode& a, const Mode& b) { return a.kind == ModeKind::Uav && b.kind != ModeKind::Uav; });

    const json& districts = require(doc, "districts", "");
    if (!districts.is_array() || districts.empty()) schema_error("districts", "expected a non-empty array");
    std::vector<std::vector<double>> columns;
    std::vector<double> base;
    bool any_table = false;
    for (std::size_t n = 0; n < districts.size(); ++n) {
        const std::string where = "districts[" + std::to_string(n) + "]";
        const json& d = districts[n];
        if (!d.is_object()) schema_error(where, "expected an object");
        if (auto it = d.find("name"); it != d.end() && !it->is_string()) schema_error(where + ".name", "expected a string");
        spec.district_names.push_back(d.value("name", std::to_string(n + 1)));
        std::vector<double> costs;
        for (const auto& mode : spec.modes) {
            const std::string key = mode.kind == ModeKind::Uav ? "uav_cost" : "truck_cost";
            costs.push_back(nonnegative(require(d, key, where), where + "." + key));
        }
        spec.transport_cost.push_back(std::move(costs));
        std::vector<double> column;
        if (auto table = d.find("demand_table"); table != d.end()) {
            if (!table->is_array() || table->size() != static_cast<std::size_t>(spec.horizon))
                schema_error(where + ".demand_table", "expected " + std::to_string(spec.horizon) + " values");
            for (std::size_t p = 0; p < table->size(); ++p)
                column.push_back(nonnegative((*table)[p], where + ".demand_table[" + std::to_string(p) + "]"));
            any_table = true;
            base.push_back(column.front());
        } else if (auto mean = d.find("demand_mean"); mean != d.end()) {
            const double v = nonnegative(*mean, where + ".demand_mean");
            base.push_back(v);
            column.assign(static_cast<std::size_t>(spec.horizon), v);
        } else {
            schema_error(where + ".demand_mean", "missing required field 'demand_mean' (or 'demand_table')");
        }
        columns.push_back(std::move(column));
    }
    if (scenario.pattern == DemandPattern::ExplicitTable && !any_table)
        schema_error("districts.demand_table", "pattern explicit_table requires demand tables");

    if ((scenario.pattern == DemandPattern::LogisticDecreasing || scenario.pattern == DemandPattern::LogisticIncreasing) &&
        !any_table) {
        spec.demand_mean = scenario.pattern == DemandPattern::LogisticDecreasing
                               ? logistic_demand_table(base, 1.5, 0.5, spec.horizon)
                               : logistic_demand_table(base, 0.5, 1.5, spec.horizon);
    } else {
        spec.demand_mean.assign(static_cast<std::size_t>(spec.horizon), std::vector<double>(columns.size()));
        for (std::size_t n = 0; n < columns.size(); ++n)
            for (std::size_t p = 0; p < columns[n].size(); ++p) spec.demand_mean[p][n] = columns[n][p];
    }

    const json& supply = require(doc, "supply", "");
    if (supply.is_string()) {
        if (supply.get<std::string>() != "balanced") schema_error("supply", "expected \"balanced\" or an object");
        spec.supply_mean.assign(static_cast<std::size_t>(spec.horizon + 1), balanced_supply(spec));
    } else if (supply.is_object() && supply.contains("mean")) {
        spec.supply_mean.assign(static_cast<std::size_t>(spec.horizon + 1), nonnegative(supply["mean"], "supply.mean"));
    } else if (supply.is_object() && supply.contains("table")) {
        const json& table = supply["table"];
        if (!table.is_array() || table.size() != static_cast<std::size_t>(spec.horizon + 1))
            schema_error("supply.table", "expected horizon + 1 values");
        for (std::size_t t = 0; t < table.size(); ++t)
            spec.supply_mean.push_back(nonnegative(table[t], "supply.table[" + std::to_string(t) + "]"));
    } else {
        schema_error("supply", "expected \"balanced\", {\"mean\": x} or {\"table\": [...]}");
    }
    spec.validate();
    return {std::move(spec), scenario};
}

std::string instance_to_json(const InstanceSpec& spec, const ScenarioConfig& scenario) {
    json doc;
    doc["name"] = spec.name;
    doc["horizon"] = spec.horizon;
    doc["period_hours"] = spec.period_hours;
    doc["cov"] = spec.demand_cov;
    if (spec.supply_cov != spec.demand_cov) doc["supply_cov"] = spec.supply_cov;
    if (spec.deprivation_rate != kDefaultDeprivationRate) doc["deprivation_rate"] = spec.deprivation_rate;
    doc["modes"] = json::array();
    for (const auto& mode : spec.modes) doc["modes"].push_back({{"name", mode.name}, {"capacity", mode.capacity}});
    doc["districts"] = json::array();
    for (int n = 0; n < spec.num_districts(); ++n) {
        json d;
        d["name"] = spec.district_names[static_cast<std::size_t>(n)];
        std::vector<double> column;
        for (const auto& row : spec.demand_mean) column.push_back(row[static_cast<std::size_t>(n)]);
        if (is_constant(column))
            d["demand_mean"] = column.front();
        else
            d["demand_table"] = column;
        for (int k = 0; k < spec.num_modes(); ++k) {
            const auto& mode = spec.modes[static_cast<std::size_t>(k)];
            d[mode.kind == ModeKind::Uav ? "uav_cost" : "truck_cost"] =
                spec.transport_cost[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
        }
        doc["districts"].push_back(std::move(d));
    }
    if (is_constant(spec.supply_mean) && spec.supply_mean.front() == balanced_supply(spec))
        doc["supply"] = "balanced";
    else if (is_constant(spec.supply_mean))
        doc["supply"] = {{"mean", spec.supply_mean.front()}};
    else
        doc["supply"] = {{"table", spec.supply_mean}};
    doc["scenario"] = {{"pattern", to_string(scenario.pattern)}, {"seed", scenario.seed}};
    return doc.dump(2) + "\n";
}

std::pair<InstanceSpec, ScenarioConfig> load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("", "cannot open instance file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_instance(buffer.str());
}

void save_instance(const std::filesystem::path& path, const InstanceSpec& spec, const ScenarioConfig& scenario) {
    std::ofstream out(path);
    if (!out) throw ValidationError("", "cannot write instance file '" + path.string() + "'");
    out << instance_to_json(spec, scenario);
}

std::pair<InstanceSpec, ScenarioConfig> resolve_instance(const std::string& name_or_path) {
    for (const auto& name : builtin_names())
        if (name == name_or_path) return {builtin_instance(name), builtin_scenario(name)};
    if (std::filesystem::exists(name_or_path)) return load_instance(name_or_path);
    throw ValidationError("instance", "unknown instance '" + name_or_path + "' (not a built-in name or file)");
}

}  // namespace relief
