#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "../support/tiny.hpp"
#include "doctest.h"
#include "relief/error.hpp"
#include "relief/harness.hpp"
#include "relief/instances.hpp"

using namespace relief;

namespace {

// Plays a fixed list of decisions, one per epoch; empty afterwards.
class Scripted final : public Policy {
public:
    Scripted(const InstanceSpec& spec, std::vector<Decision> plan) : spec_(spec), plan_(std::move(plan)) {}
    std::string name() const override { return "scripted"; }
    Decision decide(const State& s, Rng&) override {
        info_ = {};
        if (static_cast<std::size_t>(s.epoch) < plan_.size()) return plan_[static_cast<std::size_t>(s.epoch)];
        return Decision(spec_.num_districts(), spec_.num_modes());
    }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<Scripted>(*this); }

private:
    InstanceSpec spec_;
    std::vector<Decision> plan_;
};

std::vector<std::uint64_t> seeds(int count, std::uint64_t master = 1) {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < count; ++i) out.push_back(evaluation_path_seed(master, i));
    return out;
}

void check_same_episode(const EpisodeResult& a, const EpisodeResult& b) {
    CHECK(a.path_seed == b.path_seed);
    CHECK(a.total == b.total);
    CHECK(a.deprivation == b.deprivation);
    CHECK(a.uav == b.uav);
    CHECK(a.truck == b.truck);
    CHECK(a.coverage == b.coverage);
    CHECK(a.max_deprivation_time == b.max_deprivation_time);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t t = 0; t < a.trace.size(); ++t) CHECK(a.trace[t].decision == b.trace[t].decision);
}

}  // namespace

TEST_CASE("episode simulation") {
    SUBCASE("zero demand and no allocation: all zero, full coverage") {
        tiny::Data d;
        d.supply = {4, 1, 0};
        d.demand = {0, 0, 0};
        const auto spec = tiny::instance(d);
        Scripted idle(spec, {});
        const auto r = run_episode(idle, spec, tiny::path(d));
        CHECK(r.total == 0.0);
        CHECK(r.deprivation == 0.0);
        CHECK(r.uav == 0.0);
        CHECK(r.truck == 0.0);
        CHECK(r.coverage == 1.0);
        // an empty district still counts as unsupplied, at no cost since h = 0
        CHECK(r.max_deprivation_time == 2);
        CHECK(r.trace.size() == 3);
    }
    SUBCASE("hand-evaluated two-period path") {
        // epoch 0: stock 6, ship 3 by UAV (2 vehicles); demand 5 -> shortage 2, delta 1
        // epoch 1: charge g(1) * 2, ship 4 by truck (1 vehicle); demand 3 -> 1 left over
        // epoch 2: nothing short, nothing charged
        tiny::Data d;
        d.supply = {6, 1, 0};
        d.demand = {0, 5, 3};
        d.uav_cost = 0.5;
        d.truck_cost = 2.0;
        const auto spec = tiny::instance(d);
        Decision x0(1, 2), x1(1, 2);
        x0(0, 0) = 3;
        x1(0, 1) = 4;
        Scripted plan(spec, {x0, x1});
        const auto r = run_episode(plan, spec, tiny::path(d));
        const double g1 = std::exp(0.065) - 1.0;
        CHECK(r.uav == doctest::Approx(1.0));
        CHECK(r.truck == doctest::Approx(2.0));
        CHECK(r.deprivation == doctest::Approx(2.0 * g1));
        CHECK(r.total == doctest::Approx(3.0 + 2.0 * g1));
        CHECK(r.max_deprivation_time == 1);
        CHECK(r.max_deprivation_hours == doctest::Approx(spec.period_hours));
        CHECK(r.coverage == doctest::Approx(6.0 / 8.0));
        CHECK(r.trace[1].districts[0].shortage == 2);
        CHECK(r.trace[2].districts[0].inventory == 1);
        const auto heat = deprivation_heatmap(r);
        REQUIRE(heat.size() == 1);
        CHECK(heat[0] == std::vector<double>{0.0, 2.0 * g1, 0.0});
    }
    SUBCASE("terminal deprivation is charged") {
        tiny::Data d;
        d.supply = {0, 0};
        d.demand = {0, 4};
        const auto spec = tiny::instance(d);
        Scripted idle(spec, {});
        const auto r = run_episode(idle, spec, tiny::path(d));
        CHECK(r.deprivation == doctest::Approx(4.0 * (std::exp(0.065) - 1.0)));
        CHECK(r.coverage == 0.0);
    }
    SUBCASE("infeasible decision names the policy and epoch") {
        tiny::Data d;
        d.supply = {2, 0, 0};
        d.demand = {0, 1, 1};
        const auto spec = tiny::instance(d);
        Decision x0(1, 2), x1(1, 2);
        x1(0, 1) = 5;
        Scripted bad(spec, {x0, x1});
        try {
            run_episode(bad, spec, tiny::path(d));
            FAIL("expected a feasibility error");
        } catch (const FeasibilityError& e) {
            CHECK(std::string(e.what()).find("scripted at epoch 1") != std::string::npos);
        }
    }
    SUBCASE("cost identity and heatmap sum on sampled episodes") {
        const auto spec = builtin_instance("districts-3");
        RuleBasedPolicy rule(spec);
        WarmupPolicy warm(spec);
        for (const auto seed : seeds(20)) {
            const auto path = generate_path(spec, seed);
            for (Policy* p : std::initializer_list<Policy*>{&rule, &warm}) {
                const auto r = run_episode(*p, spec, path);
                CHECK(r.total == r.deprivation + r.uav + r.truck);
                const auto heat = deprivation_heatmap(r);
                double sum = 0.0;
                for (const auto& row : heat) sum = std::accumulate(row.begin(), row.end(), sum);
                CHECK(sum == doctest::Approx(r.deprivation).epsilon(1e-12));
                CHECK(r.coverage >= 0.0);
                CHECK(r.coverage <= 1.0);
            }
        }
    }
    SUBCASE("rule-based episodes repeat exactly") {
        const auto spec = builtin_instance("districts-3");
        RuleBasedPolicy rule(spec);
        const auto path = generate_path(spec, 77);
        check_same_episode(run_episode(rule, spec, path), run_episode(rule, spec, path));
    }
    SUBCASE("coverage does not grow when an allocation shrinks") {
        const auto spec = builtin_instance("districts-3");
        RuleBasedPolicy rule(spec);
        std::mt19937_64 gen(4);
        for (const auto seed : seeds(10, 3)) {
            const auto path = generate_path(spec, seed);
            const auto base = run_episode(rule, spec, path);
            std::vector<Decision> plan;
            for (const auto& rec : base.trace) plan.push_back(rec.decision);
            std::uniform_int_distribution<int> pick(0, spec.horizon - 1);
            const int t = pick(gen);
            auto& x = plan[static_cast<std::size_t>(t)];
            for (int n = 0; n < spec.num_districts(); ++n)
                for (int k = 0; k < spec.num_modes(); ++k) x(n, k) /= 2;
            Scripted less(spec, plan);
            CHECK(run_episode(less, spec, path).coverage <= base.coverage);
        }
    }
}

TEST_CASE("benchmark") {
    const auto spec = builtin_instance("districts-3");
    RuleBasedPolicy rule(spec);
    WarmupPolicy warm(spec);
    const auto s = seeds(12);
    SUBCASE("policies see identical paths") {
        const auto report = benchmark({&rule, &warm}, spec, s);
        REQUIRE(report.episodes.size() == 2);
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(report.episodes[0][i].path_seed == s[i]);
            CHECK(report.episodes[1][i].path_seed == s[i]);
            // realized demand recorded by both policies is the same path
            for (int t = 0; t < spec.horizon; ++t)
                CHECK(report.episodes[0][i].trace[static_cast<std::size_t>(t)].demand ==
                      report.episodes[1][i].trace[static_cast<std::size_t>(t)].demand);
        }
        CHECK(report.rows[0].paths == 12);
    }
    SUBCASE("parallel equals serial") {
        const auto a = benchmark({&rule, &warm}, spec, s, 4);
        const auto b = benchmark_serial({&rule, &warm}, spec, s);
        for (std::size_t p = 0; p < 2; ++p)
            for (std::size_t i = 0; i < s.size(); ++i) check_same_episode(a.episodes[p][i], b.episodes[p][i]);
        std::ostringstream ca, cb;
        write_benchmark_csv(ca, a);
        write_benchmark_csv(cb, b);
        CHECK(ca.str() == cb.str());
    }
    SUBCASE("two copies of one policy give identical rows") {
        const auto report = benchmark({&rule, &rule}, spec, s);
        std::ostringstream out;
        write_benchmark_csv(out, report);
        std::istringstream lines(out.str());
        std::string header, r1, r2;
        std::getline(lines, header);
        std::getline(lines, r1);
        std::getline(lines, r2);
        CHECK(r1 == r2);
    }
    SUBCASE("means do not depend on path order") {
        auto reversed = s;
        std::reverse(reversed.begin(), reversed.end());
        const auto a = benchmark({&rule}, spec, s);
        const auto b = benchmark({&rule}, spec, reversed);
        CHECK(a.rows[0].mean_total == doctest::Approx(b.rows[0].mean_total).epsilon(1e-12));
        CHECK(a.rows[0].std_total == doctest::Approx(b.rows[0].std_total).epsilon(1e-12));
        CHECK(a.rows[0].coverage == doctest::Approx(b.rows[0].coverage).epsilon(1e-12));
    }
    SUBCASE("no variability gives zero spread") {
        auto flat = spec;
        flat.demand_cov = 0.0;
        flat.supply_cov = 0.0;
        RuleBasedPolicy r(flat);
        const auto report = benchmark({&r}, flat, seeds(10));
        CHECK(report.rows[0].std_total == 0.0);
        CHECK(report.rows[0].ci95_low == report.rows[0].mean_total);
    }
}

TEST_CASE("summary statistics") {
    const Stats st = summarize(std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(st.mean == doctest::Approx(2.5));
    CHECK(st.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(st.ci95_low == doctest::Approx(2.5 - 1.96 * std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(st.ci95_high == doctest::Approx(2.5 + 1.96 * std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("allocation trace") {
    const auto spec = builtin_instance("districts-3");
    SUBCASE("idle policy gives zeros") {
        Scripted idle(spec, {});
        for (const auto& row : allocation_trace(idle, spec, seeds(3)))
            for (double v : row) CHECK(v == 0.0);
    }
    SUBCASE("one path reproduces the episode and column sums match the totals") {
        RuleBasedPolicy rule(spec);
        const auto s = seeds(1, 8);
        const auto trace = allocation_trace(rule, spec, s);
        const auto ep = run_episode(rule, spec, generate_path(spec, s[0]));
        REQUIRE(trace.size() == static_cast<std::size_t>(spec.horizon));
        for (int t = 0; t < spec.horizon; ++t)
            for (int k = 0; k < spec.num_modes(); ++k) {
                Units sum = 0;
                for (int n = 0; n < spec.num_districts(); ++n) sum += ep.trace[static_cast<std::size_t>(t)].decision(n, k);
                CHECK(trace[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] == static_cast<double>(sum));
            }
    }
    SUBCASE("averaged trace sums to mean allocated units per mode") {
        WarmupPolicy warm(spec);
        const auto s = seeds(6, 9);
        const auto trace = allocation_trace(warm, spec, s);
        const auto report = benchmark({&warm}, spec, s);
        for (int k = 0; k < spec.num_modes(); ++k) {
            double column = 0.0, mean = 0.0;
            for (const auto& row : trace) column += row[static_cast<std::size_t>(k)];
            for (const auto& ep : report.episodes[0])
                for (const auto& rec : ep.trace)
                    for (int n = 0; n < spec.num_districts(); ++n) mean += static_cast<double>(rec.decision(n, k));
            CHECK(column == doctest::Approx(mean / static_cast<double>(s.size())));
        }
    }
}

TEST_CASE("value surfaces") {
    const auto spec = builtin_instance("districts-3");
    SurfaceGrid grid;
    grid.district = 1;
    grid.epochs = {0, 10, 29};
    grid.inventories = {0.0, 500.0, 2000.0};
    grid.expected_deprivation = {0.0, 100.0};
    SUBCASE("zero linear weights give a flat zero surface") {
        const auto pts = vfa_surface(LinearVFA(spec.horizon, 3), spec, grid);
        CHECK(pts.size() == 18);
        for (const auto& p : pts) CHECK(p.value == 0.0);
    }
    SUBCASE("network surface is the forward pass") {
        MlpVFA net(11, {16, 16}, 3);
        for (const auto& p : vfa_surface(net, spec, grid)) {
            const auto x = surface_input(grid, 3, p.epoch, p.inventory, p.expected_deprivation);
            CHECK(p.value == net.forward(x));
        }
    }
    SUBCASE("points outside the reachable range are flagged") {
        grid.inventories = {1e9};
        for (const auto& p : vfa_surface(LinearVFA(spec.horizon, 3), spec, grid)) CHECK(p.extrapolated);
        grid.epochs = {30};
        CHECK_THROWS_AS(vfa_surface(LinearVFA(spec.horizon, 3), spec, grid), ValidationError);
    }
}

TEST_CASE("csv output") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(1234.5678) == "1234.57");
    CHECK(format_number(0.000123456789) == "0.000123457");
    CHECK(format_number(std::nan("")) == "NA");
    CHECK(format_number(-2.5) == "-2.5");

    const auto spec = builtin_instance("districts-1");
    RuleBasedPolicy rule(spec);
    const auto report = benchmark({&rule}, spec, seeds(2));
    std::ostringstream out;
    write_benchmark_csv(out, report);
    const std::string text = out.str();
    CHECK(text.rfind("policy,mean_total,std_total,deprivation,uav,truck,max_depr_hours,coverage,runtime_s,mean_gap,"
                     "ci95_low,ci95_high,paths\n",
                     0) == 0);
    CHECK(text.find("rule-based,") != std::string::npos);
    CHECK(text.find(",NA,") != std::string::npos);

    std::ostringstream heat;
    write_heatmap_csv(heat, {{0.0, 1.5}}, spec);
    CHECK(heat.str().rfind("district,epoch,deprivation_cost\n", 0) == 0);

    std::ostringstream alloc;
    write_allocation_csv(alloc, {{1.0, 2.0}}, spec);
    CHECK(alloc.str() == "epoch,uav,truck\n0,1,2\n");
}
