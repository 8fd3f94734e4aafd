// Acceptance run: one PASS/FAIL line per criterion. Arguments restrict the
// run to the listed criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "../support/gradcheck.hpp"
#include "../support/tiny.hpp"
#include "cli.hpp"
#include "reference_tables.hpp"
#include "relief/domain.hpp"
#include "relief/harness.hpp"
#include "relief/instances.hpp"
#include "relief/milp/single_stage.hpp"
#include "relief/policies.hpp"
#include "relief/training.hpp"

using namespace relief;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
    double seconds = 0.0;  // work attributable to this criterion
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

void note(const std::string& text) { std::cerr << "  .. " << text << std::endl; }

SolverSettings exact() {
    SolverSettings s;
    s.limits.mip_gap = 0.0;
    return s;
}

// 1. exact dynamic program, the PI model and enumeration on tiny paths
Verdict criterion1() {
    const auto start = Clock::now();
    auto backend = milp::make_backend();
    double worst = 0.0;
    int cases = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto d = tiny::make(seed, seed % 2 ? 0.1 : 0.02, seed % 3 ? 0.2 : 0.05);
        const auto spec = tiny::instance(d);
        const auto path = tiny::path(d);
        const double dp = tiny::exact_dp(d);
        const double brute = tiny::enumerate_sequences(d);
        const auto pi = perfect_information(path, spec, *backend, exact().limits);
        PerfectInformationPolicy replay(spec, exact());
        const double realized = run_episode(replay, spec, path).total;
        for (double v : {brute, pi.objective, realized}) worst = std::max(worst, std::abs(v - dp));
        ++cases;
    }
    const double secs = since(start);
    return {worst <= 1e-6 && secs < 60.0,
            std::to_string(cases) + " paths, max |difference| " + fmt("%.2e", worst) + " (limit 1e-6)", secs};
}

// Shared districts-1 study: trained policies, 200 common paths, PI at gap 0.
struct Study {
    InstanceSpec spec;
    std::vector<std::uint64_t> seeds;
    BenchmarkReport report;  // rule-based, warm-up, dl-vfa, nn-vfa, pi
    BenchmarkReport reopt;   // first paths only
    int dl_episodes = 0, nn_episodes = 0;
    double train_seconds = 0.0;
    double eval_seconds = 0.0;
    double reopt_seconds = 0.0;
};

constexpr int kStudyPaths = 200;
constexpr int kBoundPaths = 50;
constexpr int kReoptPaths = 10;

const Study& study() {
    static std::optional<Study> s;
    if (s) return *s;
    s.emplace();
    s->spec = builtin_instance("districts-1");
    for (int i = 0; i < kStudyPaths; ++i) s->seeds.push_back(evaluation_path_seed(1, i));

    TrainingConfig config;
    config.episodes = 1000;
    config.time_cap_seconds = 600.0;
    config.curve_paths = 0;
    config.solver.limits.time_limit = 60.0;
    auto t0 = Clock::now();
    note("training dl-vfa (1000 episodes, 10 min cap)");
    const auto dl = train_dl_vfa(s->spec, config, 1);
    note("training nn-vfa (1000 episodes, 10 min cap)");
    const auto nn = train_nn_vfa(s->spec, config, 1);
    s->train_seconds = since(t0);
    s->dl_episodes = dl.episodes_done;
    s->nn_episodes = nn.episodes_done;

    SolverSettings greedy;
    greedy.limits.time_limit = 60.0;
    RuleBasedPolicy rule(s->spec);
    WarmupPolicy warm(s->spec);
    DlVfaPolicy dlp(s->spec, *dl.checkpoint.linear, greedy);
    NnVfaPolicy nnp(s->spec, *nn.checkpoint.mlp, greedy);
    PerfectInformationPolicy pi(s->spec, exact());
    note("evaluating 200 paths");
    t0 = Clock::now();
    s->report = benchmark({&rule, &warm, &dlp, &nnp, &pi}, s->spec, s->seeds);
    s->eval_seconds = since(t0);

    note("re-optimization on the first paths");
    SolverSettings rolling;
    rolling.limits.time_limit = 10.0;  // per epoch; the bound must hold whatever the policy's quality
    ReoptimizationPolicy reopt(s->spec, rolling);
    t0 = Clock::now();
    s->reopt = benchmark({&reopt}, s->spec, std::vector<std::uint64_t>(s->seeds.begin(), s->seeds.begin() + kReoptPaths));
    s->reopt_seconds = since(t0);
    return *s;
}

// 2. PI at gap 0 never loses to a policy on any common path
Verdict criterion2() {
    const auto& s = study();
    const auto& eps = s.report.episodes;
    const std::size_t pi = eps.size() - 1;
    int violations = 0, compared = 0;
    double worst_gap = 0.0, secs = s.reopt_seconds;
    for (std::size_t i = 0; i < static_cast<std::size_t>(kBoundPaths); ++i) {
        worst_gap = std::max(worst_gap, eps[pi][i].mean_gap);
        for (std::size_t p = 0; p < eps.size(); ++p) {
            secs += eps[p][i].seconds;
            if (p == pi) continue;
            ++compared;
            if (eps[pi][i].total > eps[p][i].total + 1e-6) ++violations;
        }
    }
    const auto& reopt = s.reopt.episodes[0];
    for (std::size_t i = 0; i < reopt.size(); ++i) {
        ++compared;
        if (eps[pi][i].total > reopt[i].total + 1e-6) ++violations;
    }
    return {violations == 0 && worst_gap <= 1e-9 && secs < 1800.0,
            std::to_string(compared) + " paired comparisons (4 policies x 50 paths, re-optimization x " +
                std::to_string(kReoptPaths) + " at 10 s per epoch), " + std::to_string(violations) + " violations, max PI gap " +
                fmt("%.1e", worst_gap),
            secs};
}

// 3. encoded network output equals the forward pass at fixed decisions
Verdict criterion3() {
    const auto start = Clock::now();
    const auto spec = builtin_instance("districts-1");
    auto backend = milp::make_backend();
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<Units> stock(0, 2000), inv(0, 400);
    std::uniform_int_distribution<int> delta(0, 10), epoch(0, spec.horizon - 1);
    const double scale[] = {1.0 / 30, 1.0 / 1000, 1.0 / 1000, 1.0 / 10, 1.0 / 20};
    double worst = 0.0;
    int points = 0, failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto net = gradcheck::random_network(gen, 5, {16, 16, 1});
        for (int j = 0; j < 5; ++j) net.layers[0].weights.col(j) *= scale[j];
        net.layers.back().weights *= 100.0;
        for (int k = 0; k < 3; ++k) {
            DistrictState d{0, 0, delta(gen), 200.0, 40.0};
            if (d.deprivation_time > 0) d.shortage = inv(gen);
            else d.inventory = inv(gen);
            const State st{epoch(gen), stock(gen), {d}};
            Decision x(1, 2);
            x(0, 0) = std::uniform_int_distribution<Units>(0, st.cw_inventory)(gen);
            x(0, 1) = std::uniform_int_distribution<Units>(0, st.cw_inventory - x(0, 0))(gen);
            auto m = milp::build_single_stage_nn(st, net, spec);
            milp::fix_decision(m, x);
            const auto r = milp::solve_single_stage(m, *backend, {.polish = true}, spec);
            ++points;
            if (r.status != milp::SolveStatus::Optimal) {
                ++failures;
                continue;
            }
            const auto f = extract_features(apply_decision(st, x, spec), spec.deprivation_rate);
            const double direct = net.forward(f.neural);
            const double err = std::abs(m.value.evaluate(r.solution.values) - direct) / std::max(1.0, std::abs(direct));
            worst = std::max(worst, err);
        }
    }
    const double secs = since(start);
    return {failures == 0 && worst <= 1e-5 && secs < 300.0,
            "100 networks x 3 points, max error " + fmt("%.2e", worst) + " (limit 1e-5), " + std::to_string(failures) +
                " unsolved",
            secs};
}

// 4. backprop against central differences
Verdict criterion4() {
    const auto start = Clock::now();
    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    int checked = 0, skipped = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int inputs = 2 + 3 * (1 + trial % 6);
        const auto net = gradcheck::random_network(gen, inputs, {16, 16, 1});
        Eigen::MatrixXd x(16, inputs);
        Eigen::VectorXd y(16);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            for (int j = 0; j < inputs; ++j) x(r, j) = nd(gen);
            y(r) = nd(gen);
        }
        const auto res = gradcheck::check(net, x, y);
        worst = std::max(worst, res.max_rel_error);
        checked += res.checked;
        skipped += res.skipped;
    }
    const double secs = since(start);
    // parameters whose perturbation crosses a ReLU kink are not differentiable there
    const bool coverage = checked >= 9 * (checked + skipped) / 10;
    return {worst < 1e-4 && coverage && secs < 60.0,
            "20 networks, " + std::to_string(checked) + " parameters (" + std::to_string(skipped) +
                " at kinks), max relative error " + fmt("%.2e", worst) + " (limit 1e-4)",
            secs};
}

// 5. deprivation functions against the closed form
Verdict criterion5() {
    const auto start = Clock::now();
    const double rate = 0.065;
    auto closed = [&](int d) { return std::exp(rate * d) - 1.0; };
    bool ok = deprivation_cost(0) == 0.0 && marginal_deprivation_cost(0) == 0.0;
    ok = ok && std::abs(deprivation_cost(1) - (std::exp(0.065) - 1.0)) <= 1e-15;
    double worst = 0.0;
    for (int d = 0; d <= 200; ++d) {
        worst = std::max(worst, std::abs(deprivation_cost(d) - closed(d)) / std::max(1.0, closed(d)));
        if (d >= 1) {
            const double g = closed(d) - closed(d - 1);
            worst = std::max(worst, std::abs(marginal_deprivation_cost(d) - g) / g);
            if (d >= 2 && !(marginal_deprivation_cost(d) > marginal_deprivation_cost(d - 1))) ok = false;
        }
    }
    ok = ok && worst <= 1e-12;
    return {ok, "gamma(1) = " + fmt("%.15f", deprivation_cost(1)) + ", g increasing on [1, 200], max relative error " +
                    fmt("%.1e", worst),
            since(start)};
}

// 6. cost ordering on districts-1 at desk scale
Verdict criterion6() {
    const auto& s = study();
    std::map<std::string, double> mean;
    for (const auto& row : s.report.rows) mean[row.policy] = row.mean_total;
    const double pi = mean["pi"], nn = mean["nn-vfa"], dl = mean["dl-vfa"], rule = mean["rule-based"];
    const double improvement = 1.0 - dl / rule;
    const double nn_vs_dl = std::abs(nn - dl) / dl;
    // "approximately equal": within 15% of each other
    const bool ordered = pi <= nn && pi <= dl && nn < rule && dl < rule && nn_vs_dl <= 0.15;
    const double secs = s.train_seconds + s.eval_seconds;
    std::ostringstream d;
    d << "means PI " << format_number(pi) << ", NN-VFA " << format_number(nn) << " (" << s.nn_episodes
      << " episodes), DL-VFA " << format_number(dl) << " (" << s.dl_episodes << " episodes), rule-based "
      << format_number(rule) << "; NN/DL differ by " << fmt("%.1f%%", 100 * nn_vs_dl) << " (limit 15%), DL-VFA "
      << fmt("%.1f%%", 100 * improvement) << " below rule-based (limit 10%)";
    return {ordered && improvement >= 0.10 && secs < 2700.0, d.str(), secs};
}

// 7. value of UAVs under re-optimization on districts-3
Verdict criterion7() {
    const auto start = Clock::now();
    SolverSettings settings;
    settings.limits.time_limit = 1.0;  // per epoch
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < 50; ++i) seeds.push_back(evaluation_path_seed(7, i));
    auto mean_of = [&](const char* name) {
        const auto spec = builtin_instance(name);
        ReoptimizationPolicy reopt(spec, settings);
        note(std::string("re-optimization on ") + name);
        return benchmark({&reopt}, spec, seeds).rows[0].mean_total;
    };
    const double both = mean_of("districts-3");
    const double trucks = mean_of("districts-3-trucks-only");
    const double reduction = 1.0 - both / trucks;
    const double secs = since(start);
    return {both <= trucks && reduction >= 0.03 && secs < 3600.0,
            "50 paths, 1 s per epoch: trucks+UAVs " + format_number(both) + " vs trucks-only " + format_number(trucks) +
                ", reduction " + fmt("%.1f%%", 100 * reduction) + " (limit 3%)",
            secs};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

// 8. identical seeds give identical files, end to end through the command line
Verdict criterion8() {
    const auto start = Clock::now();
    const fs::path dir = fs::temp_directory_path() / ("relief-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto cmd = [](std::vector<std::string> args) {
        args.insert(args.begin(), "relief");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        if (code != 0) note("exit " + std::to_string(code) + ": " + err.str());
        return code;
    };
    auto path = [&](const std::string& name) { return (dir / name).string(); };
    bool ok = true;
    std::vector<std::string> failed;
    auto same = [&](const std::string& a, const std::string& b) {
        if (!fs::exists(a) || slurp(a) != slurp(b)) {
            ok = false;
            failed.push_back(fs::path(a).filename().string());
        }
    };
    const std::vector<std::pair<std::string, std::string>> methods = {{"dl-vfa", "40"}, {"nn-vfa", "15"}};
    for (const auto& [method, episodes] : methods) {
        for (const char* copy : {"a", "b"})
            ok = cmd({"train", "--method", method, "--instance", "districts-1", "--episodes", episodes, "--buffer", "40",
                      "--curve-paths", "3", "--seed", "8", "--out", path(method + copy + ".json")}) == 0 &&
                 ok;
        same(path(method + "a.json"), path(method + "b.json"));
        same(path(method + "a.json.curve.csv"), path(method + "b.json.curve.csv"));
    }
    const std::vector<std::string> bench = {"bench", "--instance", "districts-1", "--policies",
                                            "rule-based,warm-up,dl-vfa,nn-vfa", "--checkpoints",
                                            path("dl-vfaa.json") + "," + path("nn-vfaa.json"), "--paths", "30", "--seed",
                                            "8"};
    int runs = 0;
    for (const char* workers : {"1", "3"}) {
        auto args = bench;
        args.insert(args.end(), {"--workers", workers, "--out", path(std::string("bench") + workers + ".csv")});
        ok = cmd(args) == 0 && ok;
        ++runs;
    }
    same(path("bench1.csv"), path("bench3.csv"));
    fs::remove_all(dir);
    const double secs = since(start);
    std::string detail = "2 training methods x 2 runs, " + std::to_string(runs) +
                         " benchmark runs (1 and 3 workers), 4 policies x 30 paths";
    if (!failed.empty()) {
        detail += "; differing:";
        for (const auto& f : failed) detail += " " + f;
    } else {
        detail += "; all outputs byte-identical";
    }
    return {ok && secs < 600.0, detail, secs};
}

// 9. built-in tables against the published instance data
Verdict criterion9() {
    const auto start = Clock::now();
    int fields = 0;
    std::vector<std::string> mismatches;
    auto expect = [&](bool equal, const std::string& what) {
        ++fields;
        if (!equal && mismatches.size() < 5) mismatches.push_back(what);
    };
    for (std::size_t k = 0; k < reference::kDistricts.size(); ++k) {
        const std::string name = "districts-" + std::to_string(k + 1);
        const auto spec = builtin_instance(name);
        const auto& ref = reference::kDistricts[k];
        expect(spec.num_districts() == static_cast<int>(ref.size()), name + " district count");
        if (spec.num_districts() != static_cast<int>(ref.size())) continue;
        const int uav = spec.mode_index(ModeKind::Uav), truck = spec.mode_index(ModeKind::Truck);
        for (std::size_t n = 0; n < ref.size(); ++n) {
            const std::string at = name + " district " + std::to_string(n + 1);
            expect(spec.transport_cost[n][static_cast<std::size_t>(uav)] == ref[n].uav_cost, at + " UAV cost");
            expect(spec.transport_cost[n][static_cast<std::size_t>(truck)] == ref[n].truck_cost, at + " truck cost");
            for (int p = 1; p <= spec.horizon; ++p)
                expect(spec.period_demand(p, static_cast<int>(n)) == ref[n].demand,
                       at + " demand, period " + std::to_string(p));
        }
    }
    const auto dec = builtin_instance("districts-3-demand-decreasing");
    const auto inc = builtin_instance("districts-3-demand-increasing");
    for (int p = 1; p <= static_cast<int>(reference::kPatterns.size()); ++p)
        for (int n = 0; n < 3; ++n) {
            const auto& row = reference::kPatterns[static_cast<std::size_t>(p - 1)];
            const std::string at = " district " + std::to_string(n + 1) + ", period " + std::to_string(p);
            expect(dec.period_demand(p, n) == row[static_cast<std::size_t>(n)], "decreasing demand," + at);
            expect(inc.period_demand(p, n) == row[static_cast<std::size_t>(3 + n)], "increasing demand," + at);
        }
    const auto nepal = builtin_instance("nepal");
    expect(nepal.num_districts() == static_cast<int>(reference::kNepal.size()), "nepal district count");
    const int uav = nepal.mode_index(ModeKind::Uav), truck = nepal.mode_index(ModeKind::Truck);
    for (std::size_t n = 0; n < reference::kNepal.size() && n < static_cast<std::size_t>(nepal.num_districts()); ++n) {
        const auto& ref = reference::kNepal[n];
        const std::string at = "nepal " + std::string(ref.name);
        expect(nepal.district_names[n] == ref.name, at + " name");
        expect(nepal.transport_cost[n][static_cast<std::size_t>(uav)] == ref.uav_cost, at + " UAV cost");
        expect(nepal.transport_cost[n][static_cast<std::size_t>(truck)] == ref.truck_cost, at + " truck cost");
        for (int p = 1; p <= nepal.horizon; ++p)
            expect(nepal.period_demand(p, static_cast<int>(n)) == ref.demand, at + " demand, period " + std::to_string(p));
    }
    std::string detail = std::to_string(fields) + " fields compared";
    for (const auto& m : mismatches) detail += "; mismatch: " + m;
    return {mismatches.empty(), detail, since(start)};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                            criterion6, criterion7, criterion8, criterion9};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(number)) continue;
        Verdict v;
        try {
            v = criteria[i]();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what(), 0.0};
        }
        if (!v.pass) ++failures;
        std::cout << "criterion " << number << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << " ["
                  << fmt("%.1f", v.seconds) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
