#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "relief/learning/network.hpp"
#include "relief/rng.hpp"

namespace relief {

/// Gradient of the mean squared error with respect to every layer.
struct Gradient {
    std::vector<DenseLayer> layers;
    double loss = 0.0;

    double norm() const;
    void scale(double s);
};

/// Two hidden ReLU layers over standardized inputs with a standardized linear
/// output. The standardization is fixed at construction and folded into the
/// first and last layers for embedding.
class MlpVFA {
public:
    MlpVFA() = default;
    MlpVFA(int inputs, std::vector<int> hidden, std::uint64_t seed);

    /// Fix feature and target standardization from data (rows are samples).
    void set_standardization(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets);

    /// Prediction on raw features.
    double forward(std::span<const double> raw) const;

    /// Equivalent network over raw features with the standardization folded in.
    ReluNetwork folded() const;

    /// Network over standardized features and targets (what training updates).
    const ReluNetwork& network() const noexcept { return net_; }
    ReluNetwork& network() noexcept { return net_; }

    const Eigen::VectorXd& input_mean() const noexcept { return in_mean_; }
    const Eigen::VectorXd& input_scale() const noexcept { return in_scale_; }
    double output_mean() const noexcept { return out_mean_; }
    double output_scale() const noexcept { return out_scale_; }
    void set_standardization(Eigen::VectorXd in_mean, Eigen::VectorXd in_scale, double out_mean, double out_scale);

    /// Standardize raw rows / targets.
    Eigen::MatrixXd standardize_inputs(const Eigen::MatrixXd& raw) const;
    Eigen::VectorXd standardize_targets(const Eigen::VectorXd& raw) const;

    bool operator==(const MlpVFA&) const = default;

private:
    ReluNetwork net_;
    Eigen::VectorXd in_mean_;
    Eigen::VectorXd in_scale_;
    double out_mean_ = 0.0;
    double out_scale_ = 1.0;
};

/// MSE gradient over rows `rows` of (x, y), summed sample by sample in order.
Gradient mse_gradient_serial(const ReluNetwork& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             std::span<const int> rows);

/// Same quantity with samples split into fixed chunks processed by OpenMP
/// threads; chunk partial sums are combined in chunk order, so the result does
/// not depend on the thread count.
Gradient mse_gradient_parallel(const ReluNetwork& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               std::span<const int> rows);

double mse_loss(const ReluNetwork& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const int> rows);

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 10.0;
};

class AdamOptimizer {
public:
    AdamOptimizer() = default;
    AdamOptimizer(const ReluNetwork& shape, AdamConfig config);

    /// Applies one update; returns false (and leaves the network untouched) on
    /// a non-finite loss or gradient.
    bool step(ReluNetwork& net, Gradient grad);

    const AdamConfig& config() const noexcept { return config_; }
    long steps() const noexcept { return t_; }

private:
    AdamConfig config_;
    std::vector<DenseLayer> m_;
    std::vector<DenseLayer> v_;
    long t_ = 0;
};

struct TrainStats {
    double mean_loss = 0.0;
    int batches = 0;
    int skipped = 0;
};

/// One pass of shuffled mini-batches over standardized data.
TrainStats train_epoch(ReluNetwork& net, AdamOptimizer& opt, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       int batch_size, Rng& rng, bool parallel = true);

}  // namespace relief
