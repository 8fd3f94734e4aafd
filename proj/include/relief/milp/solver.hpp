#pragma once

#include <memory>
#include <string>
#include <vector>

#include "relief/milp/model.hpp"

namespace relief::milp {

enum class SolveStatus { Optimal, Feasible, Infeasible, TimeLimit, Error };

std::string to_string(SolveStatus status);

struct SolveLimits {
    double time_limit = kInf;  // seconds
    double mip_gap = 1e-6;     // relative
    int threads = 1;
    /// After the MIP, fix the integer columns and re-solve the LP so the
    /// continuous values are exact vertices rather than tolerance-feasible.
    bool polish = false;
};

struct Solution {
    SolveStatus status = SolveStatus::Error;
    std::vector<double> values;
    double objective = kInf;
    double bound = -kInf;
    double gap = kInf;  // relative; 0 when proven optimal
    double seconds = 0.0;
    std::string message;

    bool has_solution() const noexcept {
        return status == SolveStatus::Optimal || status == SolveStatus::Feasible ||
               (status == SolveStatus::TimeLimit && !values.empty());
    }
    double value(Var v) const { return values[static_cast<std::size_t>(v.index)]; }
};

/// A MILP solver. One instance per thread; instances are not shareable.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual Solution solve(const Model& model, const SolveLimits& limits) = 0;
    virtual std::unique_ptr<SolverBackend> clone() const = 0;
};

/// Backend by name; an empty name reads RELIEF_SOLVER and defaults to "highs".
/// Throws SolverError for unknown names.
std::unique_ptr<SolverBackend> make_backend(const std::string& name = {});

std::unique_ptr<SolverBackend> make_highs_backend();

}  // namespace relief::milp
