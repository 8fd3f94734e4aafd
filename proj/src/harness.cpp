#include "relief/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "relief/error.hpp"

namespace relief {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

// Rethrows the current exception with policy and path context, keeping its category.
[[noreturn]] void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const FeasibilityError& e) {
        throw FeasibilityError(context + ": " + e.what());
    } catch (const SolverError& e) {
        throw SolverError(context + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(e.field(), context + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(context + ": " + e.what());
    }
}

std::vector<SamplePath> make_paths(const InstanceSpec& spec, const std::vector<std::uint64_t>& seeds) {
    std::vector<SamplePath> paths(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) paths[i] = generate_path(spec, seeds[i]);
    return paths;
}

BenchmarkReport collect(const std::vector<const Policy*>& policies, std::vector<std::vector<EpisodeResult>> episodes,
                        const std::vector<std::uint64_t>& seeds) {
    BenchmarkReport report;
    report.path_seeds = seeds;
    for (std::size_t p = 0; p < policies.size(); ++p) report.rows.push_back(summarize(policies[p]->name(), episodes[p]));
    report.episodes = std::move(episodes);
    return report;
}

double reachable_inventory(const InstanceSpec& spec) {
    double total = 0.0;
    for (double s : spec.supply_mean) total += s * (1.0 + 3.0 * spec.supply_cov);
    return total;
}

double reachable_deprivation(const InstanceSpec& spec) {
    double worst = 0.0;
    for (const auto& row : spec.demand_mean)
        for (double d : row) worst = std::max(worst, d * (1.0 + 2.0 * spec.demand_cov));
    return marginal_deprivation_cost(spec.horizon + 1, spec.deprivation_rate) * worst;
}

template <class Eval>
std::vector<SurfacePoint> surface(const InstanceSpec& spec, const SurfaceGrid& grid, Eval eval) {
    if (grid.district < 0 || grid.district >= spec.num_districts())
        throw ValidationError("district", "grid district out of range");
    const double inv_max = reachable_inventory(spec), depr_max = reachable_deprivation(spec);
    std::vector<SurfacePoint> out;
    for (int t : grid.epochs) {
        if (t < 0 || t >= spec.horizon) throw ValidationError("epochs", "grid epoch outside 0..T-1");
        for (double inv : grid.inventories)
            for (double g : grid.expected_deprivation) {
                SurfacePoint p{t, inv, g, eval(t, inv, g), false};
                p.extrapolated = inv < 0.0 || inv > inv_max || g < 0.0 || g > depr_max ||
                                 grid.deprivation_time > spec.horizon;
                out.push_back(p);
            }
    }
    return out;
}

}  // namespace

EpisodeResult run_episode(Policy& policy, const InstanceSpec& spec, const SamplePath& path, Rng& rng) {
    const int horizon = spec.horizon;
    if (static_cast<int>(path.events.size()) != horizon + 1)
        throw ValidationError("path", "expected " + std::to_string(horizon + 1) + " events");
    const auto start = Clock::now();
    EpisodeResult res;
    res.path_seed = path.seed;
    policy.begin_episode(path);
    State state = initial_state(spec, path.events.front());
    double gap_sum = 0.0;
    Units served_total = 0, demand_total = 0;
    for (int t = 0; t <= horizon; ++t) {
        EpochRecord rec;
        rec.epoch = t;
        rec.cw_inventory = state.cw_inventory;
        rec.districts = state.districts;
        for (int n = 0; n < spec.num_districts(); ++n) {
            rec.deprivation_cost.push_back(district_deprivation_cost(state, n, spec));
            res.max_deprivation_time = std::max(res.max_deprivation_time, state.districts[static_cast<std::size_t>(n)].deprivation_time);
        }
        rec.decision = policy.decide(state, rng);
        rec.info = policy.last_info();
        try {
            if (t == horizon && !rec.decision.empty()) throw FeasibilityError("no allocation is allowed at the terminal epoch");
            check_feasible(state, rec.decision, spec);
        } catch (const FeasibilityError& e) {
            throw FeasibilityError(policy.name() + " at epoch " + std::to_string(t) + ": " + e.what());
        }
        const auto tc = transport_cost(rec.decision, spec);
        rec.transport_uav = tc.uav;
        rec.transport_truck = tc.truck;
        res.uav += tc.uav;
        res.truck += tc.truck;
        for (double c : rec.deprivation_cost) res.deprivation += c;
        if (rec.info.solved) {
            ++res.solver_epochs;
            gap_sum += rec.info.gap;
        }
        if (rec.info.fallback) ++res.fallbacks;
        const PostDecisionState post = apply_decision(state, rec.decision, spec);
        if (t < horizon) {
            const ExogenousEvent& next = path.events[static_cast<std::size_t>(t + 1)];
            for (int n = 0; n < spec.num_districts(); ++n) {
                const Units d = next.realized_demand[static_cast<std::size_t>(n)];
                const Units s = std::min(d, post.districts[static_cast<std::size_t>(n)].inventory);
                rec.demand.push_back(d);
                rec.served.push_back(s);
                served_total += s;
                demand_total += d;
            }
            state = advance(post, next);
        }
        res.trace.push_back(std::move(rec));
    }
    res.total = res.deprivation + res.uav + res.truck;
    res.max_deprivation_hours = res.max_deprivation_time * spec.period_hours;
    res.coverage = demand_total > 0 ? static_cast<double>(served_total) / static_cast<double>(demand_total) : 1.0;
    res.mean_gap = res.solver_epochs > 0 ? gap_sum / res.solver_epochs : 0.0;
    res.seconds = since(start);
    return res;
}

EpisodeResult run_episode(Policy& policy, const InstanceSpec& spec, const SamplePath& path) {
    Rng rng(derive_seed(path.seed, "policy"));
    return run_episode(policy, spec, path, rng);
}

std::uint64_t evaluation_path_seed(std::uint64_t master, int index) {
    return derive_seed(derive_seed(master, "evaluation"), {static_cast<std::uint64_t>(index)});
}

Stats summarize(const std::vector<double>& values) {
    Stats s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi) s.mean = *lo;  // the rounded sum / n can miss a constant sample
    if (values.size() > 1 && *lo != *hi) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(sq / (n - 1.0));
    }
    const double half = 1.96 * s.std / std::sqrt(n);
    s.ci95_low = s.mean - half;
    s.ci95_high = s.mean + half;
    return s;
}

PolicySummary summarize(const std::string& policy, const std::vector<EpisodeResult>& episodes) {
    PolicySummary row;
    row.policy = policy;
    row.paths = static_cast<int>(episodes.size());
    if (episodes.empty()) return row;
    std::vector<double> totals;
    double gap_sum = 0.0;
    int gap_count = 0;
    for (const auto& e : episodes) {
        totals.push_back(e.total);
        row.deprivation += e.deprivation;
        row.uav += e.uav;
        row.truck += e.truck;
        row.max_depr_hours += e.max_deprivation_hours;
        row.coverage += e.coverage;
        row.runtime_s += e.seconds;
        row.fallbacks += e.fallbacks;
        if (e.solver_epochs > 0) {
            gap_sum += e.mean_gap;
            ++gap_count;
        }
    }
    const double n = static_cast<double>(episodes.size());
    const Stats s = summarize(totals);
    row.mean_total = s.mean;
    row.std_total = s.std;
    row.ci95_low = s.ci95_low;
    row.ci95_high = s.ci95_high;
    row.deprivation /= n;
    row.uav /= n;
    row.truck /= n;
    row.max_depr_hours /= n;
    row.coverage /= n;
    row.runtime_s /= n;
    row.mean_gap = gap_count > 0 ? gap_sum / gap_count : 0.0;
    return row;
}

BenchmarkReport benchmark(const std::vector<const Policy*>& policies, const InstanceSpec& spec,
                          const std::vector<std::uint64_t>& path_seeds, int workers) {
    const int n_paths = static_cast<int>(path_seeds.size());
    const auto paths = make_paths(spec, path_seeds);
    std::vector<std::vector<EpisodeResult>> episodes(policies.size(), std::vector<EpisodeResult>(path_seeds.size()));
    std::exception_ptr failure;
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
    {
        std::vector<std::unique_ptr<Policy>> mine;
        try {
            for (const Policy* p : policies) mine.push_back(p->clone());
        } catch (...) {
#pragma omp critical(relief_benchmark_error)
            if (!failure) failure = std::current_exception();
        }
#pragma omp for schedule(dynamic, 1)
        for (int i = 0; i < n_paths; ++i) {
            for (std::size_t p = 0; p < mine.size(); ++p) {
                try {
                    episodes[p][static_cast<std::size_t>(i)] = run_episode(*mine[p], spec, paths[static_cast<std::size_t>(i)]);
                } catch (...) {
                    try {
                        rethrow_with_context(mine[p]->name() + " on path seed " + std::to_string(path_seeds[static_cast<std::size_t>(i)]));
                    } catch (...) {
#pragma omp critical(relief_benchmark_error)
                        if (!failure) failure = std::current_exception();
                    }
                }
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
    return collect(policies, std::move(episodes), path_seeds);
}

BenchmarkReport benchmark_serial(const std::vector<const Policy*>& policies, const InstanceSpec& spec,
                                 const std::vector<std::uint64_t>& path_seeds) {
    const auto paths = make_paths(spec, path_seeds);
    std::vector<std::vector<EpisodeResult>> episodes(policies.size());
    for (std::size_t p = 0; p < policies.size(); ++p) {
        auto mine = policies[p]->clone();
        for (std::size_t i = 0; i < paths.size(); ++i) {
            try {
                episodes[p].push_back(run_episode(*mine, spec, paths[i]));
            } catch (...) {
                rethrow_with_context(mine->name() + " on path seed " + std::to_string(path_seeds[i]));
            }
        }
    }
    return collect(policies, std::move(episodes), path_seeds);
}

std::vector<std::vector<double>> allocation_trace(const Policy& policy, const InstanceSpec& spec,
                                                  const std::vector<std::uint64_t>& path_seeds, int workers) {
    const auto report = benchmark({&policy}, spec, path_seeds, workers);
    std::vector<std::vector<double>> trace(static_cast<std::size_t>(spec.horizon),
                                           std::vector<double>(static_cast<std::size_t>(spec.num_modes()), 0.0));
    if (path_seeds.empty()) return trace;
    for (const auto& e : report.episodes.front())
        for (int t = 0; t < spec.horizon; ++t)
            for (int k = 0; k < spec.num_modes(); ++k) {
                Units sum = 0;
                for (int n = 0; n < spec.num_districts(); ++n) sum += e.trace[static_cast<std::size_t>(t)].decision(n, k);
                trace[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] += static_cast<double>(sum);
            }
    for (auto& row : trace)
        for (double& v : row) v /= static_cast<double>(path_seeds.size());
    return trace;
}

std::vector<std::vector<double>> deprivation_heatmap(const EpisodeResult& episode) {
    if (episode.trace.empty()) return {};
    const std::size_t districts = episode.trace.front().deprivation_cost.size();
    std::vector<std::vector<double>> out(districts, std::vector<double>(episode.trace.size(), 0.0));
    for (std::size_t t = 0; t < episode.trace.size(); ++t)
        for (std::size_t n = 0; n < districts; ++n) out[n][t] = episode.trace[t].deprivation_cost[n];
    return out;
}

std::vector<double> surface_input(const SurfaceGrid& grid, int districts, int epoch, double inventory, double depr) {
    std::vector<double> x{static_cast<double>(epoch), grid.cw_inventory};
    for (int n = 0; n < districts; ++n) {
        if (n == grid.district) {
            x.insert(x.end(), {inventory, static_cast<double>(grid.deprivation_time), depr});
        } else {
            x.insert(x.end(), grid.other_districts.begin(), grid.other_districts.end());
        }
    }
    return x;
}

std::vector<SurfacePoint> vfa_surface(const LinearVFA& vfa, const InstanceSpec& spec, const SurfaceGrid& grid) {
    return surface(spec, grid, [&](int t, double inv, double g) {
        return vfa.predict(t, grid.district, {inv, static_cast<double>(grid.deprivation_time), g});
    });
}

std::vector<SurfacePoint> vfa_surface(const MlpVFA& vfa, const InstanceSpec& spec, const SurfaceGrid& grid) {
    return surface(spec, grid, [&](int t, double inv, double g) {
        return vfa.forward(surface_input(grid, spec.num_districts(), t, inv, g));
    });
}

std::string format_number(double value) {
    if (!std::isfinite(value)) return "NA";
    if (value == 0.0) return "0";
    std::ostringstream os;
    os << std::setprecision(6) << value;
    return os.str();
}

void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report, bool with_runtime) {
    out << "policy,mean_total,std_total,deprivation,uav,truck,max_depr_hours,coverage,runtime_s,mean_gap,ci95_low,"
           "ci95_high,paths\n";
    for (const auto& r : report.rows) {
        out << r.policy << ',' << format_number(r.mean_total) << ',' << format_number(r.std_total) << ','
            << format_number(r.deprivation) << ',' << format_number(r.uav) << ',' << format_number(r.truck) << ','
            << format_number(r.max_depr_hours) << ',' << format_number(r.coverage) << ','
            << (with_runtime ? format_number(r.runtime_s) : std::string("NA")) << ',' << format_number(r.mean_gap) << ','
            << format_number(r.ci95_low) << ',' << format_number(r.ci95_high) << ',' << r.paths << '\n';
    }
}

void write_allocation_csv(std::ostream& out, const std::vector<std::vector<double>>& trace, const InstanceSpec& spec) {
    out << "epoch";
    for (const auto& m : spec.modes) out << ',' << m.name;
    out << '\n';
    for (std::size_t t = 0; t < trace.size(); ++t) {
        out << t;
        for (double v : trace[t]) out << ',' << format_number(v);
        out << '\n';
    }
}

void write_heatmap_csv(std::ostream& out, const std::vector<std::vector<double>>& heatmap, const InstanceSpec& spec) {
    out << "district,epoch,deprivation_cost\n";
    for (std::size_t n = 0; n < heatmap.size(); ++n)
        for (std::size_t t = 0; t < heatmap[n].size(); ++t)
            out << spec.district_names[n] << ',' << t << ',' << format_number(heatmap[n][t]) << '\n';
}

void write_surface_csv(std::ostream& out, const std::vector<SurfacePoint>& surface) {
    out << "epoch,inventory,expected_deprivation,value,extrapolated\n";
    for (const auto& p : surface)
        out << p.epoch << ',' << format_number(p.inventory) << ',' << format_number(p.expected_deprivation) << ','
            << format_number(p.value) << ',' << (p.extrapolated ? 1 : 0) << '\n';
}

}  // namespace relief
