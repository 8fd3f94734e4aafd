#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "relief/domain.hpp"
#include "relief/instances.hpp"
#include "relief/learning/linear.hpp"
#include "relief/learning/mlp.hpp"
#include "relief/policies.hpp"

namespace relief {

/// One decision epoch of a simulated episode.
struct EpochRecord {
    int epoch = 0;
    Units cw_inventory = 0;                  // before the decision
    std::vector<DistrictState> districts;    // pre-decision district states
    Decision decision;
    std::vector<double> deprivation_cost;    // g(delta) * h charged at this epoch, per district
    std::vector<Units> served;               // min(realized demand of the coming period, post-decision inventory)
    std::vector<Units> demand;               // realized demand of the coming period
    double transport_uav = 0.0;
    double transport_truck = 0.0;
    DecisionInfo info;
};

struct EpisodeResult {
    std::uint64_t path_seed = 0;
    double total = 0.0;
    double deprivation = 0.0;
    double uav = 0.0;
    double truck = 0.0;
    int max_deprivation_time = 0;  // periods
    double max_deprivation_hours = 0.0;
    double coverage = 1.0;
    int solver_epochs = 0;
    int fallbacks = 0;
    double mean_gap = 0.0;
    double seconds = 0.0;
    std::vector<EpochRecord> trace;  // epochs 0..T
};

/// Simulates S_0 .. S_T along `path`. `rng` feeds stochastic policies.
/// Throws FeasibilityError (with the epoch in the message) if the policy
/// returns an inadmissible decision.
EpisodeResult run_episode(Policy& policy, const InstanceSpec& spec, const SamplePath& path, Rng& rng);

/// Same, with the policy stream derived from the path seed.
EpisodeResult run_episode(Policy& policy, const InstanceSpec& spec, const SamplePath& path);

/// Seed of evaluation path i under a master seed.
std::uint64_t evaluation_path_seed(std::uint64_t master, int index);

struct PolicySummary {
    std::string policy;
    int paths = 0;
    double mean_total = 0.0;
    double std_total = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    double deprivation = 0.0;
    double uav = 0.0;
    double truck = 0.0;
    double max_depr_hours = 0.0;
    double coverage = 0.0;
    double runtime_s = 0.0;  // mean wall-clock per episode
    double mean_gap = 0.0;
    int fallbacks = 0;
};

struct BenchmarkReport {
    std::vector<PolicySummary> rows;
    std::vector<std::uint64_t> path_seeds;
    std::vector<std::vector<EpisodeResult>> episodes;  // [policy][path]
};

/// Mean, sample standard deviation and normal-approximation 95% interval.
struct Stats {
    double mean = 0.0;
    double std = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
};
Stats summarize(const std::vector<double>& values);

PolicySummary summarize(const std::string& policy, const std::vector<EpisodeResult>& episodes);

/// Every policy on the same paths (common random numbers). Episodes are
/// distributed over OpenMP threads, each with its own policy copies; results
/// are gathered by path index so they do not depend on the schedule.
BenchmarkReport benchmark(const std::vector<const Policy*>& policies, const InstanceSpec& spec,
                          const std::vector<std::uint64_t>& path_seeds, int workers = 0);

/// Single-threaded reference of `benchmark`.
BenchmarkReport benchmark_serial(const std::vector<const Policy*>& policies, const InstanceSpec& spec,
                                 const std::vector<std::uint64_t>& path_seeds);

/// Mean allocated units per (epoch, mode) over the given paths; [t][k], t = 0..T-1.
std::vector<std::vector<double>> allocation_trace(const Policy& policy, const InstanceSpec& spec,
                                                  const std::vector<std::uint64_t>& path_seeds, int workers = 0);

/// Deprivation cost incurred per district and epoch; [n][t], t = 0..T.
std::vector<std::vector<double>> deprivation_heatmap(const EpisodeResult& episode);

/// Grid over (epoch, inventory, expected deprivation cost) for one district;
/// the other inputs are pinned.
struct SurfaceGrid {
    int district = 0;
    std::vector<int> epochs;
    std::vector<double> inventories;
    std::vector<double> expected_deprivation;
    int deprivation_time = 0;
    double cw_inventory = 0.0;
    /// Features of the districts not on the grid (NN only).
    std::array<double, 3> other_districts{0.0, 0.0, 0.0};
};

struct SurfacePoint {
    int epoch = 0;
    double inventory = 0.0;
    double expected_deprivation = 0.0;
    double value = 0.0;
    bool extrapolated = false;
};

/// Predicted future cost of the grid district (linear) or of the whole state (network).
std::vector<SurfacePoint> vfa_surface(const LinearVFA& vfa, const InstanceSpec& spec, const SurfaceGrid& grid);
std::vector<SurfacePoint> vfa_surface(const MlpVFA& vfa, const InstanceSpec& spec, const SurfaceGrid& grid);

/// Neural input vector used for the surface at one grid point.
std::vector<double> surface_input(const SurfaceGrid& grid, int districts, int epoch, double inventory, double depr);

/// CSV writers; floats use 6 significant digits.
void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report, bool with_runtime = false);
void write_allocation_csv(std::ostream& out, const std::vector<std::vector<double>>& trace, const InstanceSpec& spec);
void write_heatmap_csv(std::ostream& out, const std::vector<std::vector<double>>& heatmap, const InstanceSpec& spec);
void write_surface_csv(std::ostream& out, const std::vector<SurfacePoint>& surface);

std::string format_number(double value);

}  // namespace relief
