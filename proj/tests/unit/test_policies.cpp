#include <deque>
#include <random>

#include "../support/tiny.hpp"
#include "doctest.h"
#include "relief/error.hpp"
#include "relief/harness.hpp"
#include "relief/instances.hpp"
#include "relief/policies.hpp"
#include "relief/training.hpp"

using namespace relief;

namespace {

DrawFn scripted(std::deque<int> values) {
    auto queue = std::make_shared<std::deque<int>>(std::move(values));
    return [queue](int lo, int hi) {
        REQUIRE_FALSE(queue->empty());
        const int v = queue->front();
        queue->pop_front();
        REQUIRE(v >= lo);
        REQUIRE(v <= hi);
        return v;
    };
}

State blank(const InstanceSpec& spec, Units cw, int epoch = 0) {
    State s;
    s.epoch = epoch;
    s.cw_inventory = cw;
    s.districts.assign(static_cast<std::size_t>(spec.num_districts()), DistrictState{});
    for (int n = 0; n < spec.num_districts(); ++n) {
        s.districts[static_cast<std::size_t>(n)].demand_forecast = spec.period_demand(epoch + 1, n);
        s.districts[static_cast<std::size_t>(n)].forecast_std = spec.demand_cov * spec.period_demand(epoch + 1, n);
    }
    return s;
}

// Any state the dynamics can produce: nonnegative stocks, shortage only with
// delta >= 1, epochs 0..T.
State random_state(const InstanceSpec& spec, std::mt19937_64& gen, Units max_stock) {
    std::uniform_int_distribution<Units> stock(0, max_stock);
    std::uniform_int_distribution<int> epoch(0, spec.horizon), delta(0, 8);
    State s = blank(spec, stock(gen), epoch(gen));
    for (auto& d : s.districts) {
        d.deprivation_time = delta(gen);
        if (d.deprivation_time > 0) {
            d.shortage = stock(gen) / 2;
        } else {
            d.inventory = stock(gen) / 2;
        }
    }
    return s;
}

LinearVFA random_linear(const InstanceSpec& spec, std::mt19937_64& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    LinearVFA v(spec.horizon, spec.num_districts());
    for (auto& row : v.weights)
        for (auto& w : row) w = {100.0 * nd(gen), -std::abs(nd(gen)), 5.0 * nd(gen), std::abs(nd(gen))};
    return v;
}

SolverSettings exact() {
    SolverSettings s;
    s.limits.mip_gap = 0.0;
    return s;
}

}  // namespace

TEST_CASE("warm-up heuristic") {
    const auto d1 = builtin_instance("districts-1");
    SUBCASE("scripted draws: UAV loads replaced by one truck") {
        State s = blank(d1, 10000);
        s.districts[0].deprivation_time = 3;
        // Z1 = 1, Z2 = 2, n1 = 0, Z3 = 1
        const Decision x = warmup_decide(s, d1, scripted({1, 2, 0, 1}));
        CHECK(x(0, 0) == 0);
        CHECK(x(0, 1) == 5000);
    }
    SUBCASE("scripted draws: truck skipped") {
        State s = blank(d1, 10000);
        s.districts[0].deprivation_time = 2;
        const Decision x = warmup_decide(s, d1, scripted({2, 3, 0, 3}));
        CHECK(x(0, 0) == 600);
        CHECK(x(0, 1) == 0);
    }
    SUBCASE("UAV loads need enough stock") {
        State s = blank(d1, 500);
        s.districts[0].deprivation_time = 2;
        const Decision x = warmup_decide(s, d1, scripted({1, 3, 0, 3}));
        CHECK(x.empty());
    }
    SUBCASE("truck amount is capped by the remaining stock") {
        State s = blank(d1, 700);
        s.districts[0].deprivation_time = 1;
        const Decision x = warmup_decide(s, d1, scripted({1, 2, 0, 1}));
        CHECK(x(0, 0) == 0);
        CHECK(x(0, 1) == 700);
    }
    SUBCASE("no deprivation or no stock gives nothing") {
        Rng rng(3);
        for (int i = 0; i < 200; ++i) {
            CHECK(warmup_decide(blank(d1, 10000), d1, rng).empty());
            State s = blank(d1, 0);
            s.districts[0].deprivation_time = 5;
            CHECK(warmup_decide(s, d1, rng).empty());
        }
    }
    SUBCASE("trucks-only instance skips the UAV phase") {
        const auto spec = builtin_instance("districts-3-trucks-only");
        State s = blank(spec, 3000);
        for (auto& d : s.districts) d.deprivation_time = 3;
        // only n1 and Z3 are drawn
        const Decision x = warmup_decide(s, spec, scripted({2, 1}));
        CHECK(x(2, 0) == 3000);
        CHECK(x.total() == 3000);
    }
}

TEST_CASE("rule-based heuristic") {
    const auto d3 = builtin_instance("districts-3");
    SUBCASE("no district waiting two periods: nothing is sent") {
        CHECK(rule_based_decide(blank(d3, 4000), d3).empty());
        State s = blank(d3, 4000);
        s.districts[1].deprivation_time = 1;
        s.districts[1].shortage = 30;
        CHECK(rule_based_decide(s, d3).empty());
    }
    SUBCASE("ties go to the first district") {
        State s = blank(d3, 4000);
        for (auto& d : s.districts) {
            d.deprivation_time = 2;
            d.demand_forecast = 0;
        }
        const Decision x = rule_based_decide(s, d3);
        CHECK(x(0, 1) == 4000);
        CHECK(x.total() == 4000);
    }
    SUBCASE("UAV cover, then stock to the costliest district") {
        State s = blank(d3, 4000);
        s.districts[0].deprivation_time = 2;
        s.districts[0].demand_forecast = 200;
        s.districts[1].deprivation_time = 1;
        s.districts[1].shortage = 50;
        const Decision x = rule_based_decide(s, d3);
        CHECK(x(0, 0) == 200);
        CHECK(x(0, 1) == 0);
        CHECK(x(1, 1) == 3800);
        CHECK(x.total() == 4000);
    }
    SUBCASE("selected district's UAV loads move to the truck") {
        State s = blank(d3, 4000);
        s.districts[2].deprivation_time = 3;
        s.districts[2].shortage = 10;
        s.districts[2].demand_forecast = 250;
        const Decision x = rule_based_decide(s, d3);
        CHECK(x(2, 0) == 0);
        CHECK(x(2, 1) == 4000);
    }
    SUBCASE("UAV cover capped by the stock") {
        State s = blank(d3, 300);
        s.districts[0].deprivation_time = 2;
        s.districts[0].demand_forecast = 1000;
        s.districts[1].deprivation_time = 2;
        s.districts[1].demand_forecast = 1000;
        s.districts[1].shortage = 1;
        const Decision x = rule_based_decide(s, d3);
        CHECK(x(0, 0) == 300);
        CHECK(x(1, 0) == 0);
        CHECK(x(1, 1) == 0);
        CHECK(x.total() == 300);
    }
    SUBCASE("no stock, terminal epoch") {
        CHECK(rule_based_decide(blank(d3, 0), d3).empty());
        CHECK(rule_based_decide(blank(d3, 500, d3.horizon), d3).empty());
    }
    SUBCASE("pure function of the state") {
        std::mt19937_64 gen(5);
        for (int i = 0; i < 500; ++i) {
            const State s = random_state(d3, gen, 3000);
            const Decision a = rule_based_decide(s, d3);
            rule_based_decide(random_state(d3, gen, 3000), d3);
            CHECK(rule_based_decide(s, d3) == a);
        }
    }
}

TEST_CASE("every policy returns feasible decisions") {
    std::mt19937_64 gen(11);
    SUBCASE("heuristics on random states") {
        for (const char* name : {"districts-3", "districts-3-trucks-only", "nepal"}) {
            const auto spec = builtin_instance(name);
            WarmupPolicy warm(spec);
            RuleBasedPolicy rule(spec);
            Rng rng(1);
            for (int i = 0; i < 10000; ++i) {
                const State s = random_state(spec, gen, 20000);
                CHECK_NOTHROW(check_feasible(s, warm.decide(s, rng), spec));
                CHECK_NOTHROW(check_feasible(s, rule.decide(s, rng), spec));
            }
        }
    }
    SUBCASE("solver policies on random states") {
        const auto spec = builtin_instance("districts-3");
        DlVfaPolicy dl(spec, random_linear(spec, gen), exact());
        MlpVFA net(2 + 3 * spec.num_districts(), {16, 16}, 7);
        Eigen::MatrixXd feats = Eigen::MatrixXd::Random(50, 2 + 3 * spec.num_districts()).cwiseAbs() * 1000.0;
        net.set_standardization(feats, Eigen::VectorXd::Random(50) * 1000.0);
        // untrained networks make slow models; a short limit keeps this quick
        // and exercises the fallback path as well
        SolverSettings quick;
        quick.limits.time_limit = 1.0;
        NnVfaPolicy nn(spec, net, quick);
        Rng rng(1);
        for (int i = 0; i < 300; ++i) {
            const State s = random_state(spec, gen, 6000);
            const Decision a = dl.decide(s, rng);
            CHECK_NOTHROW(check_feasible(s, a, spec));
            CHECK_FALSE(dl.last_info().fallback);
            if (i % 6 == 0) CHECK_NOTHROW(check_feasible(s, nn.decide(s, rng), spec));
        }
        const auto small = tiny::instance(tiny::make(2));
        ReoptimizationPolicy ro(small, exact());
        for (int i = 0; i < 300; ++i) {
            const State s = random_state(small, gen, 8);
            CHECK_NOTHROW(check_feasible(s, ro.decide(s, rng), small));
        }
    }
}

TEST_CASE("exploration with epsilon = 1 replays the warm-up heuristic") {
    const auto spec = builtin_instance("districts-3");
    TrainingConfig cfg;
    cfg.episodes = 4;
    cfg.buffer_size = 6;
    cfg.update_every = 2;
    cfg.epsilon0 = 1.0;
    cfg.epsilon_decay = 1.0;
    cfg.curve_paths = 0;
    const std::uint64_t seed = 21;
    std::vector<std::vector<Decision>> seen;
    train_dl_vfa(spec, cfg, seed, [&](int, const std::vector<Decision>& d) { seen.push_back(d); });
    REQUIRE(seen.size() == 4);
    Rng draws(exploration_seed(seed));
    for (int r = 1; r <= 4; ++r) {
        std::vector<Decision> expected;
        simulate_episode(spec, generate_path(spec, training_path_seed(seed, r)),
                         [&](const State& s) { return warmup_decide(s, spec, draws); }, &expected);
        CHECK(seen[static_cast<std::size_t>(r - 1)] == expected);
    }
}

TEST_CASE("training without episodes") {
    const auto spec = builtin_instance("districts-1");
    TrainingConfig cfg;
    cfg.episodes = 0;
    cfg.buffer_size = 20;
    cfg.curve_paths = 0;
    cfg.pretrain_passes = 3;
    SUBCASE("linear: the warm-start regression") {
        const auto res = train_dl_vfa(spec, cfg, 4);
        const auto buffer = warmup_buffer(spec, 20, 20, 4);
        REQUIRE(res.checkpoint.linear.has_value());
        CHECK(*res.checkpoint.linear == regress_linear(buffer, filter_outliers(buffer), spec, cfg.discount));
        CHECK(res.episodes_done == 0);
        CHECK_FALSE(res.truncated);
    }
    SUBCASE("network: pre-trained and reproducible") {
        const auto a = train_nn_vfa(spec, cfg, 4);
        const auto b = train_nn_vfa(spec, cfg, 4);
        REQUIRE(a.checkpoint.mlp.has_value());
        CHECK(a.checkpoint == b.checkpoint);
        CHECK(a.checkpoint.mlp->network().layers.size() == 3);
        CHECK(a.checkpoint.mlp->network().layers[0].weights.rows() == 16);
        CHECK(a.checkpoint.mlp->network().layers[1].weights.rows() == 16);
    }
    SUBCASE("time cap truncates") {
        cfg.episodes = 5;
        cfg.time_cap_seconds = 1e-9;
        const auto res = train_dl_vfa(spec, cfg, 4);
        CHECK(res.truncated);
        CHECK(res.checkpoint.truncated);
        CHECK(res.episodes_done == 0);
    }
}

TEST_CASE("re-optimization") {
    SUBCASE("terminal epoch and zero demand") {
        tiny::Data d;
        d.supply = {5, 0, 0};
        d.demand = {0, 0, 0};
        const auto spec = tiny::instance(d);
        ReoptimizationPolicy ro(spec, exact());
        Rng rng;
        State s = initial_state(spec, tiny::path(d).events[0]);
        CHECK(ro.decide(s, rng).empty());
        s.epoch = spec.horizon;
        CHECK(ro.decide(s, rng).empty());
    }
    SUBCASE("deterministic single district covers the coming demand by truck") {
        // one period left with demand 7: a truck (5 units, 0.2) plus a UAV
        // (2 units, 0.1) is the cheapest way to cover it exactly
        tiny::Data d;
        d.supply = {9, 0};
        d.demand = {0, 7};
        d.rate = 2.0;
        const auto spec = tiny::instance(d);
        ReoptimizationPolicy ro(spec, exact(), false);
        Rng rng;
        const Decision x = ro.decide(initial_state(spec, tiny::path(d).events[0]), rng);
        CHECK(x.district_total(0) == 7);
        CHECK(x(0, 1) == 5);
        CHECK(x(0, 0) == 2);
    }
    SUBCASE("on the mean path without margin it attains the perfect-information cost") {
        auto backend = milp::make_backend();
        for (std::uint64_t k = 0; k < 10; ++k) {
            const auto d = tiny::make(k);
            const auto spec = tiny::instance(d);
            const auto path = tiny::path(d);
            ReoptimizationPolicy ro(spec, exact(), false);
            const auto ep = run_episode(ro, spec, path);
            const auto pi = perfect_information(path, spec, *backend, exact().limits);
            CHECK(ep.total == doctest::Approx(pi.objective).epsilon(1e-9));
            CHECK(pi.objective == doctest::Approx(tiny::exact_dp(d)).epsilon(1e-9));
        }
    }
}

TEST_CASE("perfect information") {
    auto backend = milp::make_backend();
    SUBCASE("zero demand costs nothing") {
        tiny::Data d;
        d.supply = {3, 2, 0, 1, 0};
        d.demand = {0, 0, 0, 0, 0};
        const auto r = perfect_information(tiny::path(d), tiny::instance(d), *backend, exact().limits);
        CHECK(r.objective == doctest::Approx(0.0));
        CHECK(r.gap == doctest::Approx(0.0));
    }
    SUBCASE("no policy beats it on the same path") {
        std::mt19937_64 gen(2);
        for (std::uint64_t k = 0; k < 50; ++k) {
            const auto d = tiny::make(100 + k);
            const auto spec = tiny::instance(d);
            const auto path = tiny::path(d);
            PerfectInformationPolicy pi(spec, exact());
            const double bound = run_episode(pi, spec, path).total;
            CHECK(bound == doctest::Approx(tiny::exact_dp(d)).epsilon(1e-9));
            RuleBasedPolicy rule(spec);
            WarmupPolicy warm(spec);
            ReoptimizationPolicy ro(spec, exact());
            DlVfaPolicy dl(spec, random_linear(spec, gen), exact());
            for (Policy* p : std::initializer_list<Policy*>{&rule, &warm, &ro, &dl})
                CHECK(bound <= run_episode(*p, spec, path).total + 1e-9);
        }
    }
    SUBCASE("replayed schedule reproduces the objective") {
        const auto spec = builtin_instance("districts-1");
        const auto path = generate_path(spec, 9);
        PerfectInformationPolicy pi(spec, exact());
        const auto ep = run_episode(pi, spec, path);
        CHECK(ep.total == doctest::Approx(pi.objective()).epsilon(1e-6));
        CHECK(ep.fallbacks == 0);
    }
}

TEST_CASE("value-function policies check their shapes") {
    const auto spec = builtin_instance("districts-3");
    CHECK_THROWS_AS(DlVfaPolicy(spec, LinearVFA(spec.horizon, 2), exact()), ValidationError);
    CHECK_THROWS_AS(NnVfaPolicy(spec, MlpVFA(5, {16, 16}, 1), exact()), ValidationError);
}
