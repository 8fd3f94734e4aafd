#include "relief/learning/linear.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "relief/error.hpp"

namespace relief {

DistrictWeights fit_linear(std::span<const LinearRecord> records, double ridge) {
    if (records.empty()) throw ValidationError("records", "regression needs at least one record");
    // augmented least squares [X; sqrt(ridge) D] w = [y; 0], solved by QR to
    // avoid squaring the condition number of X
    const auto rows = static_cast<Eigen::Index>(records.size());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rows + 3, 4);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(rows + 3);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& r = records[static_cast<std::size_t>(i)];
        x.row(i) << 1.0, r.features[0], r.features[1], r.features[2];
        y(i) = r.target;
    }
    for (int j = 1; j < 4; ++j) x(rows + j - 1, j) = std::sqrt(ridge);
    const Eigen::Vector4d w = x.colPivHouseholderQr().solve(y);
    return {w(0), w(1), w(2), w(3)};
}

DistrictWeights smooth_weights(const DistrictWeights& old, const DistrictWeights& fresh, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha", "step size must lie in [0, 1]");
    DistrictWeights out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - alpha) * old[i] + alpha * fresh[i];
    return out;
}

double LinearVFA::predict(int epoch, int district, const std::array<double, 3>& f) const {
    const auto& w = weights.at(static_cast<std::size_t>(epoch)).at(static_cast<std::size_t>(district));
    return w[0] + w[1] * f[0] + w[2] * f[1] + w[3] * f[2];
}

}  // namespace relief
