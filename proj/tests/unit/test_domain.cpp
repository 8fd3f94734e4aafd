#include <cmath>
#include <random>

#include "doctest.h"
#include "relief/domain.hpp"
#include "relief/error.hpp"

using namespace relief;

namespace {

// Values computed independently at 30 digits.
constexpr double kGamma1 = 0.0671590243841926278;
constexpr double kGamma12 = 1.18147226549820117;
constexpr double kG2 = 0.0716693589404292078;

InstanceSpec one_district(Units uav_cap = 200, double uav_cost = 150, Units truck_cap = 5000, double truck_cost = 900) {
    InstanceSpec s;
    s.name = "t";
    s.district_names = {"1"};
    s.modes = {{"uav", ModeKind::Uav, uav_cap}, {"truck", ModeKind::Truck, truck_cap}};
    s.transport_cost = {{uav_cost, truck_cost}};
    s.horizon = 3;
    s.demand_mean.assign(3, {200.0});
    s.supply_mean.assign(4, 200.0);
    return s;
}

State state_of(Units cw, Units inv, Units h, int delta, double forecast = 0, double sd = 0, int epoch = 0) {
    return State{epoch, cw, {DistrictState{inv, h, delta, forecast, sd}}};
}

}  // namespace

TEST_CASE("deprivation cost closed form") {
    CHECK(deprivation_cost(0) == 0.0);
    CHECK(deprivation_cost(1) == doctest::Approx(kGamma1).epsilon(1e-14));
    CHECK(deprivation_cost(12) == doctest::Approx(kGamma12).epsilon(1e-14));
    CHECK(deprivation_cost(-1) == 0.0);
    CHECK(deprivation_cost(-7) == 0.0);
}

TEST_CASE("marginal deprivation cost") {
    CHECK(marginal_deprivation_cost(0) == 0.0);
    CHECK(marginal_deprivation_cost(1) == doctest::Approx(kGamma1).epsilon(1e-14));
    CHECK(marginal_deprivation_cost(2) == doctest::Approx(kG2).epsilon(1e-14));
}

TEST_CASE("gamma increasing and convex, g nondecreasing") {
    for (int d = 1; d <= 200; ++d) {
        CHECK(deprivation_cost(d) > deprivation_cost(d - 1));
        if (d >= 2) CHECK(marginal_deprivation_cost(d) >= marginal_deprivation_cost(d - 1));
        if (d >= 1 && d < 200)
            CHECK(deprivation_cost(d + 1) - 2 * deprivation_cost(d) + deprivation_cost(d - 1) > 0.0);
    }
}

TEST_CASE("direct cost examples") {
    InstanceSpec s = one_district();
    SUBCASE("deprivation plus one truck") {
        Decision x(1, 2);
        x(0, 1) = 3000;
        const State st = state_of(5000, 0, 100, 2);
        CHECK(direct_cost(st, x, s) == doctest::Approx(907.166935894042920).epsilon(1e-13));
    }
    SUBCASE("nothing") { CHECK(direct_cost(state_of(100, 0, 0, 0), Decision(1, 2), s) == 0.0); }
    SUBCASE("ceiling of UAV loads") {
        Decision x(1, 2);
        x(0, 0) = 400;
        CHECK(direct_cost(state_of(1000, 0, 0, 0), x, s) == 300.0);
        x(0, 0) = 401;
        CHECK(direct_cost(state_of(1000, 0, 0, 0), x, s) == 450.0);
    }
    SUBCASE("infeasible decision") {
        Decision x(1, 2);
        x(0, 0) = 2000;
        CHECK_THROWS_AS(direct_cost(state_of(1000, 0, 0, 0), x, s), FeasibilityError);
    }
    SUBCASE("terminal epoch charges deprivation only and forbids decisions") {
        const State st = state_of(1000, 0, 100, 2, 0, 0, 3);
        CHECK(direct_cost(st, Decision(1, 2), s) == doctest::Approx(100 * kG2));
        Decision x(1, 2);
        x(0, 1) = 1;
        CHECK_THROWS_AS(direct_cost(st, x, s), FeasibilityError);
    }
}

TEST_CASE("vehicle count is the ceiling") {
    InstanceSpec s = one_district();
    Decision x(1, 2);
    for (Units a : {0, 1, 199, 200, 201, 5000, 5001}) {
        x(0, 0) = a;
        x(0, 1) = a;
        const Units v = x.vehicles(0, 0, s);
        CHECK(v * 200 >= a);
        if (a > 0) CHECK((v - 1) * 200 < a);
        CHECK(x.vehicles(0, 1, s) == (a + 4999) / 5000);
    }
}

TEST_CASE("apply_decision") {
    InstanceSpec s = one_district();
    const State st = state_of(1000, 100, 0, 0);
    Decision x(1, 2);
    x(0, 0) = 200;
    auto post = apply_decision(st, x, s);
    CHECK(post.cw_inventory == 800);
    CHECK(post.districts[0].inventory == 300);

    auto same = apply_decision(st, Decision(1, 2), s);
    CHECK(same.cw_inventory == st.cw_inventory);
    CHECK(same.districts == st.districts);

    Decision all(1, 2);
    all(0, 1) = 1000;
    CHECK(apply_decision(st, all, s).cw_inventory == 0);
}

TEST_CASE("advance examples") {
    auto step = [](Units inv, Units demand, int delta) {
        PostDecisionState post{0, 0, {DistrictState{inv, 0, delta, 0, 0}}};
        ExogenousEvent e{7, {demand}, {50.0}, {10.0}};
        return advance(post, e);
    };
    auto a = step(300, 250, 0);
    CHECK(a.districts[0].inventory == 50);
    CHECK(a.districts[0].shortage == 0);
    CHECK(a.districts[0].deprivation_time == 0);
    CHECK(a.cw_inventory == 7);
    CHECK(a.epoch == 1);
    CHECK(a.districts[0].demand_forecast == 50.0);
    CHECK(a.districts[0].forecast_std == 10.0);

    auto b = step(250, 250, 3);
    CHECK(b.districts[0].inventory == 0);
    CHECK(b.districts[0].shortage == 0);
    CHECK(b.districts[0].deprivation_time == 4);

    auto c = step(0, 0, 0);
    CHECK(c.districts[0].inventory == 0);
    CHECK(c.districts[0].shortage == 0);
    CHECK(c.districts[0].deprivation_time == 1);
}

TEST_CASE("expected shortage and features") {
    PostDecisionState post{4, 900, {DistrictState{100, 0, 0, 200, 40}}};
    CHECK(expected_shortage(post, 0) == 180.0);
    post.districts[0].inventory = 300;
    CHECK(expected_shortage(post, 0) == 0.0);
    PostDecisionState zero{0, 0, {DistrictState{}}};
    CHECK(expected_shortage(zero, 0) == 0.0);

    post.districts[0].inventory = 100;
    auto f = extract_features(post);
    CHECK(f.linear[0][2] == doctest::Approx(12.0886243891546730).epsilon(1e-13));
    CHECK(f.forecast_margin[0] == 80.0);
    CHECK(f.neural.size() == 5);
    CHECK(f.neural[0] == 4.0);
    CHECK(f.neural[1] == 900.0);

    post.districts[0].inventory = 1000;
    CHECK(extract_features(post).linear[0][2] == 0.0);

    PostDecisionState three{0, 0, std::vector<DistrictState>(3)};
    CHECK(extract_features(three).neural.size() == 11);
}

TEST_CASE("transition invariants over random states") {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<Units> qty(0, 600);
    std::uniform_int_distribution<int> dl(0, 10);
    InstanceSpec s = one_district();
    s.district_names = {"1", "2"};
    s.transport_cost = {{150, 900}, {50, 300}};
    s.demand_mean.assign(3, {200.0, 100.0});
    for (int trial = 0; trial < 2000; ++trial) {
        State st{0, qty(gen) * 3, {}};
        for (int n = 0; n < 2; ++n) {
            const Units h = qty(gen) % 3 == 0 ? qty(gen) : 0;
            st.districts.push_back(DistrictState{h > 0 ? 0 : qty(gen), h, h > 0 ? 1 + dl(gen) : dl(gen), 150.0, 30.0});
        }
        Decision x(2, 2);
        Units left = st.cw_inventory;
        for (int n = 0; n < 2; ++n)
            for (int k = 0; k < 2; ++k) {
                const Units a = left > 0 ? qty(gen) % (left + 1) : 0;
                x(n, k) = a;
                left -= a;
            }
        const auto post = apply_decision(st, x, s);
        CHECK(post.cw_inventory + x.total() == st.cw_inventory);
        ExogenousEvent e{qty(gen), {qty(gen), qty(gen)}, {100.0, 100.0}, {20.0, 20.0}};
        const auto next = advance(post, e);
        CHECK(next.cw_inventory == post.cw_inventory + e.supply_arrival);
        for (int n = 0; n < 2; ++n) {
            const auto& d = next.districts[static_cast<std::size_t>(n)];
            CHECK(d.inventory * d.shortage == 0);
            CHECK((d.deprivation_time == 0) == (post.districts[static_cast<std::size_t>(n)].inventory >
                                                e.realized_demand[static_cast<std::size_t>(n)]));
            if (d.shortage > 0) CHECK(d.deprivation_time >= 1);
        }
        const double c = direct_cost(st, x, s);
        CHECK(c >= 0.0);
        bool deprived = false;
        for (const auto& d : st.districts) deprived |= d.shortage > 0 && d.deprivation_time > 0;
        CHECK((c == 0.0) == (!deprived && x.empty()));
        const auto f1 = extract_features(post);
        const auto f2 = extract_features(post);
        CHECK(f1.neural == f2.neural);
        for (const auto& l : f1.linear) CHECK(l[2] >= 0.0);
    }
}

TEST_CASE("feasibility checks") {
    InstanceSpec s = one_district();
    const State st = state_of(100, 0, 0, 0);
    Decision neg(1, 2);
    neg(0, 0) = -1;
    CHECK_THROWS_AS(check_feasible(st, neg, s), FeasibilityError);
    CHECK_THROWS_AS(check_feasible(st, Decision(1, 1), s), FeasibilityError);
    CHECK_NOTHROW(check_feasible(st, Decision(1, 2), s));
}

TEST_CASE("spec validation") {
    InstanceSpec s = one_district();
    CHECK_NOTHROW(s.validate());
    auto bad = s;
    bad.modes[0].capacity = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = s;
    bad.demand_mean[1][0] = -1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = s;
    bad.horizon = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
