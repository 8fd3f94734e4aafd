#include <Highs.h>

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "relief/error.hpp"
#include "relief/milp/solver.hpp"

namespace relief::milp {

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::TimeLimit: return "time_limit";
        case SolveStatus::Error: return "error";
    }
    return "error";
}

namespace {

struct Arrays {
    std::vector<double> cost, col_lower, col_upper, row_lower, row_upper, values;
    std::vector<HighsInt> start, index, integrality;
};

Arrays to_arrays(const Model& model) {
    Arrays a;
    for (const auto& col : model.columns()) {
        a.cost.push_back(col.cost);
        a.col_lower.push_back(col.lower);
        a.col_upper.push_back(col.upper);
        a.integrality.push_back(col.type == VarType::Continuous ? 0 : 1);
    }
    a.start.push_back(0);
    for (const auto& row : model.rows()) {
        a.row_lower.push_back(row.lower);
        a.row_upper.push_back(row.upper);
        for (const auto& [idx, coef] : row.terms) {
            a.index.push_back(idx);
            a.values.push_back(coef);
        }
        a.start.push_back(static_cast<HighsInt>(a.index.size()));
    }
    return a;
}

void configure(Highs& highs, const SolveLimits& limits) {
    highs.setOptionValue("output_flag", std::getenv("RELIEF_SOLVER_LOG") != nullptr);
    highs.setOptionValue("threads", static_cast<HighsInt>(std::max(1, limits.threads)));
    highs.setOptionValue("random_seed", static_cast<HighsInt>(0));
    highs.setOptionValue("mip_rel_gap", limits.mip_gap);
    if (std::isfinite(limits.time_limit)) highs.setOptionValue("time_limit", std::max(0.01, limits.time_limit));
}

HighsStatus pass(Highs& highs, const Model& model, const Arrays& a, bool integral) {
    const bool has_int = integral && model.num_integer() > 0;
    return highs.passModel(model.num_vars(), model.num_rows(), static_cast<HighsInt>(a.index.size()),
                           static_cast<HighsInt>(MatrixFormat::kRowwise), static_cast<HighsInt>(ObjSense::kMinimize),
                           model.objective_constant(), a.cost.data(), a.col_lower.data(), a.col_upper.data(),
                           a.row_lower.data(), a.row_upper.data(), a.start.data(), a.index.data(), a.values.data(),
                           has_int ? a.integrality.data() : nullptr);
}

class HighsBackend final : public SolverBackend {
public:
    std::string name() const override { return "highs"; }

    std::unique_ptr<SolverBackend> clone() const override { return std::make_unique<HighsBackend>(); }

    Solution solve(const Model& model, const SolveLimits& limits) override {
        const auto started = std::chrono::steady_clock::now();
        Solution sol;
        if (model.num_vars() == 0) {
            // nothing to decide; HiGHS rejects empty models with rows
            sol.status = SolveStatus::Optimal;
            for (const auto& row : model.rows())
                if (row.lower > 1e-9 || row.upper < -1e-9) sol.status = SolveStatus::Infeasible;
            if (sol.status == SolveStatus::Optimal) {
                sol.objective = sol.bound = model.objective_constant();
                sol.gap = 0.0;
            }
            return sol;
        }
        const Arrays a = to_arrays(model);
        Highs highs;
        configure(highs, limits);
        if (pass(highs, model, a, true) == HighsStatus::kError) throw SolverError("HiGHS rejected the model");
        const HighsStatus run = highs.run();
        const HighsModelStatus status = highs.getModelStatus();
        const HighsInfo& info = highs.getInfo();
        const bool mip = model.num_integer() > 0;
        const bool has_primal = info.primal_solution_status == kSolutionStatusFeasible;
        if (has_primal) sol.values = highs.getSolution().col_value;
        switch (status) {
            case HighsModelStatus::kOptimal: sol.status = SolveStatus::Optimal; break;
            case HighsModelStatus::kInfeasible:
            case HighsModelStatus::kUnboundedOrInfeasible: sol.status = SolveStatus::Infeasible; break;
            case HighsModelStatus::kTimeLimit:
            case HighsModelStatus::kIterationLimit:
            case HighsModelStatus::kSolutionLimit:
            case HighsModelStatus::kInterrupt: sol.status = SolveStatus::TimeLimit; break;
            default:
                sol.status = has_primal ? SolveStatus::Feasible : SolveStatus::Error;
                sol.message = "HiGHS status: " + highs.modelStatusToString(status);
                break;
        }
        if (run == HighsStatus::kError && sol.status != SolveStatus::Infeasible) {
            sol.status = SolveStatus::Error;
            sol.message = "HiGHS run failed: " + highs.modelStatusToString(status);
        }
        if (has_primal) {
            sol.objective = info.objective_function_value;
            if (mip) {
                sol.bound = info.mip_dual_bound;
                sol.gap = status == HighsModelStatus::kOptimal ? std::min(info.mip_gap, limits.mip_gap)
                                                                : info.mip_gap;
                if (!std::isfinite(sol.gap)) sol.gap = kInf;
            } else {
                sol.bound = sol.objective;
                sol.gap = 0.0;
            }
            if (limits.polish && mip) polish(model, a, limits, sol);
        }
        sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return sol;
    }

private:
    static void polish(const Model& model, Arrays a, const SolveLimits& limits, Solution& sol) {
        for (std::size_t j = 0; j < a.integrality.size(); ++j) {
            if (a.integrality[j] == 0) continue;
            const double v = std::round(sol.values[j]);
            a.col_lower[j] = v;
            a.col_upper[j] = v;
        }
        Highs lp;
        configure(lp, limits);
        if (pass(lp, model, a, false) == HighsStatus::kError) return;
        lp.run();
        if (lp.getModelStatus() != HighsModelStatus::kOptimal) return;
        sol.values = lp.getSolution().col_value;
        for (std::size_t j = 0; j < a.integrality.size(); ++j)
            if (a.integrality[j] != 0) sol.values[j] = a.col_lower[j];
        sol.objective = lp.getInfo().objective_function_value;
    }
};

}  // namespace

std::unique_ptr<SolverBackend> make_highs_backend() { return std::make_unique<HighsBackend>(); }

std::unique_ptr<SolverBackend> make_backend(const std::string& name) {
    std::string chosen = name;
    if (chosen.empty()) {
        const char* env = std::getenv("RELIEF_SOLVER");
        chosen = env != nullptr && *env != '\0' ? env : "highs";
    }
    if (chosen == "highs") return make_highs_backend();
    throw SolverError("unknown solver backend '" + chosen + "' (available: highs)");
}

}  // namespace relief::milp
