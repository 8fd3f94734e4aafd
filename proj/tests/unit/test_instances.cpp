#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "relief/error.hpp"
#include "relief/instances.hpp"

using namespace relief;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("relief_test_" + name);
}

}  // namespace

TEST_CASE("built-in districts instances") {
    auto d1 = builtin_instance("districts-1");
    CHECK(d1.num_districts() == 1);
    CHECK(d1.demand_mean[0][0] == 200);
    CHECK(d1.transport_cost[0][0] == 150);
    CHECK(d1.transport_cost[0][1] == 900);
    CHECK(d1.modes[0].capacity == 200);
    CHECK(d1.modes[1].capacity == 5000);
    CHECK(d1.horizon == 30);
    CHECK(d1.period_hours == 6.0);
    CHECK(d1.demand_cov == 0.2);

    auto d3 = builtin_instance("districts-3");
    CHECK(d3.demand_mean[0] == std::vector<double>{200, 300, 100});
    CHECK(d3.transport_cost == std::vector<std::vector<double>>{{50, 300}, {150, 900}, {250, 1500}});
    CHECK(d3.supply_mean.size() == 31);
    for (double s : d3.supply_mean) CHECK(s == 600.0);

    auto nepal = builtin_instance("nepal");
    CHECK(nepal.num_districts() == 13);
    CHECK(nepal.district_names[0] == "Dolakha");
    CHECK(nepal.demand_mean[0][0] == 217);
    CHECK(nepal.transport_cost[0] == std::vector<double>{202, 1256});

    CHECK_THROWS_AS(builtin_instance("districts-9"), ValidationError);
}

TEST_CASE("supply equals average demand for every built-in") {
    for (const auto& name : builtin_names()) {
        const auto spec = builtin_instance(name);
        double total = 0;
        for (const auto& row : spec.demand_mean) total += std::accumulate(row.begin(), row.end(), 0.0);
        CHECK(spec.supply_mean.front() == doctest::Approx(total / spec.horizon));
    }
}

TEST_CASE("scenario variants") {
    auto trucks = builtin_instance("districts-3-trucks-only");
    CHECK(trucks.num_modes() == 1);
    CHECK(trucks.modes[0].kind == ModeKind::Truck);
    CHECK(builtin_instance("districts-3-low-cov").demand_cov == 0.1);
    CHECK(builtin_instance("districts-3-high-cov").demand_cov == 0.3);
    auto dec = builtin_instance("districts-3-demand-decreasing");
    CHECK(dec.demand_mean[0][0] == 300);
    CHECK(dec.demand_mean[29][0] == 100);
    auto inc = builtin_instance("districts-3-demand-increasing");
    CHECK(inc.demand_mean[14][2] == 97);
}

TEST_CASE("logistic table edge cases") {
    const std::vector<double> base{200, 300, 100};
    auto flat = logistic_demand_table(base, 1.0, 1.0, 30);
    for (const auto& row : flat) CHECK(row == base);
    // other horizons stay monotone and hit both endpoints
    auto short_dec = logistic_demand_table(base, 1.5, 0.5, 10);
    CHECK(short_dec.front()[0] == 300);
    CHECK(short_dec.back()[0] == 100);
    for (std::size_t p = 1; p < short_dec.size(); ++p) CHECK(short_dec[p][1] <= short_dec[p - 1][1]);
}

TEST_CASE("sample paths") {
    auto spec = builtin_instance("districts-3");
    SUBCASE("determinism and shape") {
        auto a = generate_path(spec, 42);
        auto b = generate_path(spec, 42);
        CHECK(a == b);
        CHECK(a.events.size() == 31);
        CHECK(a.events[0].realized_demand == std::vector<Units>{0, 0, 0});
        CHECK(a.events[30].next_forecast == std::vector<double>{0, 0, 0});
        CHECK(a.events[3].next_forecast == std::vector<double>{200, 300, 100});
        CHECK(a.events[3].next_forecast_std[1] == doctest::Approx(60.0));
        CHECK(!(a == generate_path(spec, 43)));
        for (const auto& e : a.events) {
            CHECK(e.supply_arrival >= 0);
            for (Units d : e.realized_demand) CHECK(d >= 0);
        }
    }
    SUBCASE("zero CoV gives the means") {
        auto det = spec;
        det.demand_cov = det.supply_cov = 0.0;
        auto p = generate_path(det, 5);
        for (int t = 1; t <= 30; ++t) CHECK(p.events[static_cast<std::size_t>(t)].realized_demand == std::vector<Units>{200, 300, 100});
        for (const auto& e : p.events) CHECK(e.supply_arrival == 600);
        CHECK(mean_path(spec).events[4].realized_demand == std::vector<Units>{200, 300, 100});
    }
    SUBCASE("empirical mean") {
        double sum = 0;
        const int samples = 10000;
        for (int s = 0; s < samples; ++s) sum += static_cast<double>(generate_path(spec, static_cast<std::uint64_t>(s)).events[1].realized_demand[0]);
        CHECK(std::abs(sum / samples - 200.0) < 2.0);
    }
    SUBCASE("district draws do not depend on the other districts") {
        // dropping a district leaves the remaining districts' draws unchanged
        auto one = make_instance("x", std::vector<DistrictData>{{"1", 200, 50, 300}}, ScenarioConfig{});
        auto p3 = generate_path(spec, 11);
        auto p1 = generate_path(one, 11);
        for (int t = 1; t <= 30; ++t)
            CHECK(p1.events[static_cast<std::size_t>(t)].realized_demand[0] == p3.events[static_cast<std::size_t>(t)].realized_demand[0]);
    }
}

TEST_CASE("instance file round trip") {
    for (const auto& name : builtin_names()) {
        const auto spec = builtin_instance(name);
        const auto scenario = builtin_scenario(name);
        const auto path = temp_file(name + ".json");
        save_instance(path, spec, scenario);
        const auto [loaded, sc] = load_instance(path);
        CHECK(loaded == spec);
        CHECK(sc.cov == scenario.cov);
        CHECK(sc.uav_enabled == scenario.uav_enabled);
        std::filesystem::remove(path);
    }
}

TEST_CASE("instance file errors") {
    const std::string good = R"({
  "name": "x", "horizon": 2, "period_hours": 6, "cov": 0.2,
  "modes": [{"name": "truck", "capacity": 5000}],
  "districts": [{"name": "a", "demand_mean": 10, "truck_cost": 100}],
  "supply": "balanced"
})";
    CHECK_NOTHROW(parse_instance(good));
    auto [spec, sc] = parse_instance(good);
    CHECK(spec.supply_mean == std::vector<double>{10, 10, 10});
    CHECK(!sc.uav_enabled);

    std::string missing = good;
    missing.replace(missing.find(", \"capacity\": 5000"), 18, "");
    try {
        parse_instance(missing);
        FAIL("expected a schema error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("capacity") != std::string::npos);
    }

    std::string negative = good;
    negative.replace(negative.find("\"demand_mean\": 10"), 17, "\"demand_mean\": -10");
    CHECK_THROWS_AS(parse_instance(negative), ValidationError);

    try {
        parse_instance("{\n  \"horizon\": 2,\n  oops\n}");
        FAIL("expected a parse error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}
