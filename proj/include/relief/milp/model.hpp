#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace relief::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Integer, Binary };

/// Handle to a model column.
struct Var {
    int index = -1;
    bool valid() const noexcept { return index >= 0; }
};

/// Sparse affine expression sum(coef * var) + constant.
class LinExpr {
public:
    LinExpr() = default;
    LinExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
    LinExpr(Var v, double coef = 1.0) { add(v, coef); }  // NOLINT(google-explicit-constructor)

    LinExpr& add(Var v, double coef) {
        if (coef != 0.0) terms_.emplace_back(v.index, coef);
        return *this;
    }
    LinExpr& add(const LinExpr& other, double scale = 1.0);
    LinExpr& add_constant(double c) {
        constant_ += c;
        return *this;
    }

    LinExpr& operator+=(const LinExpr& o) { return add(o, 1.0); }
    LinExpr& operator-=(const LinExpr& o) { return add(o, -1.0); }

    const std::vector<std::pair<int, double>>& terms() const noexcept { return terms_; }
    double constant() const noexcept { return constant_; }

    /// Value at a column assignment.
    double evaluate(const std::vector<double>& values) const;

    /// Merge duplicate columns and drop zeros.
    void compress();

private:
    std::vector<std::pair<int, double>> terms_;
    double constant_ = 0.0;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, const LinExpr& e);

struct Column {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    VarType type = VarType::Continuous;
    double cost = 0.0;
};

/// lower <= expr <= upper, with the expression constant moved into the bounds.
struct Row {
    std::string name;
    std::vector<std::pair<int, double>> terms;
    double lower = -kInf;
    double upper = kInf;
};

/// A minimization MILP.
class Model {
public:
    Var add_var(double lower, double upper, VarType type, std::string name = {});
    Var add_continuous(double lower, double upper, std::string name = {}) {
        return add_var(lower, upper, VarType::Continuous, std::move(name));
    }
    Var add_integer(double lower, double upper, std::string name = {}) {
        return add_var(lower, upper, VarType::Integer, std::move(name));
    }
    Var add_binary(std::string name = {}) { return add_var(0.0, 1.0, VarType::Binary, std::move(name)); }

    void add_range(const LinExpr& expr, double lower, double upper, std::string name = {});
    void add_le(const LinExpr& lhs, const LinExpr& rhs, std::string name = {});
    void add_ge(const LinExpr& lhs, const LinExpr& rhs, std::string name = {});
    void add_eq(const LinExpr& lhs, const LinExpr& rhs, std::string name = {});

    /// Adds to the objective (costs and constant).
    void minimize(const LinExpr& expr);

    void fix(Var v, double value);

    int num_vars() const noexcept { return static_cast<int>(columns_.size()); }
    int num_rows() const noexcept { return static_cast<int>(rows_.size()); }
    int num_integer() const noexcept;

    const std::vector<Column>& columns() const noexcept { return columns_; }
    std::vector<Column>& columns() noexcept { return columns_; }
    const std::vector<Row>& rows() const noexcept { return rows_; }
    double objective_constant() const noexcept { return objective_constant_; }

    double objective_value(const std::vector<double>& values) const;

    /// Largest bound or row violation of an assignment (integrality included).
    double max_violation(const std::vector<double>& values) const;

    /// CPLEX LP file format.
    void write_lp(std::ostream& out) const;

private:
    std::vector<Column> columns_;
    std::vector<Row> rows_;
    double objective_constant_ = 0.0;
};

}  // namespace relief::milp
