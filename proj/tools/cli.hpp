#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relief/training.hpp"

namespace relief::cli {

enum ExitCode { kOk = 0, kValidation = 2, kSolver = 3, kTruncated = 4 };

struct InstanceOptions {
    std::string action;  // list, export, validate
    std::string name;
    std::string path;
};

struct TrainOptions {
    std::string method;
    std::string instance;
    std::uint64_t seed = 1;
    std::string out;
    std::string curve;     // default: <out>.curve.csv
    std::string manifest;  // default: <out>.manifest.json
    TrainingConfig config;
};

struct BenchOptions {
    std::string instance;
    std::vector<std::string> policies{"rule-based"};
    int paths = 200;
    std::uint64_t seed = 1;
    std::vector<std::string> checkpoints;
    double epoch_time_limit = 900.0;  // re-optimization, per epoch
    double solve_time_limit = 14400.0;  // value-function policies, per decision
    double pi_time_limit = 14400.0;
    double mip_gap = 1e-6;
    bool with_pi = false;
    bool no_margin = false;
    bool with_runtime = false;
    int workers = 0;
    std::string out = "bench.csv";
    std::string manifest;
};

struct TraceOptions {
    std::string kind;
    std::string instance;
    std::string policy = "rule-based";
    std::string checkpoint;
    std::uint64_t seed = 1;
    int path_index = 0;
    int paths = 50;
    double epoch_time_limit = 900.0;
    int workers = 0;
    // surface grid
    int district = 0;
    std::vector<int> epochs;
    std::vector<double> inventories;
    std::vector<double> expected_deprivation{0.0};
    int deprivation_time = 0;
    double cw_inventory = 0.0;
    std::string out = "trace.csv";
    std::string manifest;
};

struct Options {
    InstanceOptions instance;
    TrainOptions train;
    BenchOptions bench;
    TraceOptions trace;
};

/// Registers every subcommand and flag on `app`, bound to `opts`.
void configure(CLI::App& app, Options& opts);

/// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// FNV-1a of the text, as 16 hex digits.
std::string digest(const std::string& text);

}  // namespace relief::cli
