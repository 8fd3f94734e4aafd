#include "relief/milp/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "relief/error.hpp"

namespace relief::milp {

LinExpr& LinExpr::add(const LinExpr& other, double scale) {
    for (const auto& [idx, coef] : other.terms_)
        if (coef * scale != 0.0) terms_.emplace_back(idx, coef * scale);
    constant_ += scale * other.constant_;
    return *this;
}

double LinExpr::evaluate(const std::vector<double>& values) const {
    double v = constant_;
    for (const auto& [idx, coef] : terms_) v += coef * values[static_cast<std::size_t>(idx)];
    return v;
}

void LinExpr::compress() {
    std::map<int, double> merged;
    for (const auto& [idx, coef] : terms_) merged[idx] += coef;
    terms_.clear();
    for (const auto& [idx, coef] : merged)
        if (coef != 0.0) terms_.emplace_back(idx, coef);
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a.add(b, 1.0); }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a.add(b, -1.0); }
LinExpr operator*(double s, const LinExpr& e) {
    LinExpr r;
    r.add(e, s);
    return r;
}

Var Model::add_var(double lower, double upper, VarType type, std::string name) {
    if (!(lower <= upper)) throw SolverError("variable '" + name + "' has empty bounds");
    if (std::isinf(lower) && lower > 0) throw SolverError("variable '" + name + "' has an infinite lower bound");
    if (name.empty()) name = "c" + std::to_string(columns_.size());
    columns_.push_back({std::move(name), lower, upper, type, 0.0});
    return Var{static_cast<int>(columns_.size()) - 1};
}

void Model::add_range(const LinExpr& expr, double lower, double upper, std::string name) {
    LinExpr e = expr;
    e.compress();
    if (name.empty()) name = "r" + std::to_string(rows_.size());
    const double c = e.constant();
    rows_.push_back({std::move(name), e.terms(), lower - c, upper - c});
}

void Model::add_le(const LinExpr& lhs, const LinExpr& rhs, std::string name) {
    add_range(lhs - rhs, -kInf, 0.0, std::move(name));
}

void Model::add_ge(const LinExpr& lhs, const LinExpr& rhs, std::string name) {
    add_range(lhs - rhs, 0.0, kInf, std::move(name));
}

void Model::add_eq(const LinExpr& lhs, const LinExpr& rhs, std::string name) {
    add_range(lhs - rhs, 0.0, 0.0, std::move(name));
}

void Model::minimize(const LinExpr& expr) {
    for (const auto& [idx, coef] : expr.terms()) columns_[static_cast<std::size_t>(idx)].cost += coef;
    objective_constant_ += expr.constant();
}

void Model::fix(Var v, double value) {
    auto& col = columns_[static_cast<std::size_t>(v.index)];
    col.lower = value;
    col.upper = value;
}

int Model::num_integer() const noexcept {
    return static_cast<int>(
        std::count_if(columns_.begin(), columns_.end(), [](const Column& c) { return c.type != VarType::Continuous; }));
}

double Model::objective_value(const std::vector<double>& values) const {
    double v = objective_constant_;
    for (std::size_t j = 0; j < columns_.size(); ++j) v += columns_[j].cost * values[j];
    return v;
}

double Model::max_violation(const std::vector<double>& values) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        const auto& col = columns_[j];
        worst = std::max({worst, col.lower - values[j], values[j] - col.upper});
        if (col.type != VarType::Continuous) worst = std::max(worst, std::abs(values[j] - std::round(values[j])));
    }
    for (const auto& row : rows_) {
        double a = 0.0;
        for (const auto& [idx, coef] : row.terms) a += coef * values[static_cast<std::size_t>(idx)];
        worst = std::max({worst, row.lower - a, a - row.upper});
    }
    return worst;
}

namespace {

void write_terms(std::ostream& out, const std::vector<std::pair<int, double>>& terms, const std::vector<Column>& cols) {
    if (terms.empty()) {
        out << " 0 " << cols.front().name;
        return;
    }
    for (const auto& [idx, coef] : terms) {
        out << (coef < 0 ? " - " : " + ") << std::abs(coef) << ' ' << cols[static_cast<std::size_t>(idx)].name;
    }
}

}  // namespace

void Model::write_lp(std::ostream& out) const {
    out.precision(17);
    out << "\\ objective constant " << objective_constant_ << "\nMinimize\n obj:";
    std::vector<std::pair<int, double>> obj;
    for (std::size_t j = 0; j < columns_.size(); ++j)
        if (columns_[j].cost != 0.0) obj.emplace_back(static_cast<int>(j), columns_[j].cost);
    if (columns_.empty()) {
        out << " 0\nEnd\n";
        return;
    }
    write_terms(out, obj, columns_);
    out << "\nSubject To\n";
    for (const auto& row : rows_) {
        const bool lo = std::isfinite(row.lower);
        const bool hi = std::isfinite(row.upper);
        if (lo && hi && row.lower == row.upper) {
            out << ' ' << row.name << ':';
            write_terms(out, row.terms, columns_);
            out << " = " << row.lower << '\n';
            continue;
        }
        if (lo) {
            out << ' ' << row.name << (hi ? "_lo:" : ":");
            write_terms(out, row.terms, columns_);
            out << " >= " << row.lower << '\n';
        }
        if (hi) {
            out << ' ' << row.name << (lo ? "_hi:" : ":");
            write_terms(out, row.terms, columns_);
            out << " <= " << row.upper << '\n';
        }
    }
    out << "Bounds\n";
    for (const auto& col : columns_) {
        if (col.type == VarType::Binary) continue;
        if (std::isinf(col.lower))
            out << " -inf <= " << col.name;
        else
            out << ' ' << col.lower << " <= " << col.name;
        if (std::isfinite(col.upper)) out << " <= " << col.upper;
        out << '\n';
    }
    bool any = false;
    for (const auto& col : columns_)
        if (col.type == VarType::Integer) {
            out << (any ? " " : "General\n ") << col.name;
            any = true;
        }
    if (any) out << '\n';
    any = false;
    for (const auto& col : columns_)
        if (col.type == VarType::Binary) {
            out << (any ? " " : "Binary\n ") << col.name;
            any = true;
        }
    if (any) out << '\n';
    out << "End\n";
}

}  // namespace relief::milp
