#include "relief/learning/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relief/error.hpp"

namespace relief {

namespace {

constexpr int kChunk = 32;

std::vector<DenseLayer> zeros_like(const ReluNetwork& net) {
    std::vector<DenseLayer> out;
    for (const auto& l : net.layers)
        out.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    return out;
}

// Adds the gradient of scale * (f(x) - y)^2 for one sample; returns the squared error.
double accumulate_sample(const ReluNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& x, double y, double scale,
                         std::vector<DenseLayer>& grad, std::vector<Eigen::VectorXd>& acts,
                         std::vector<Eigen::VectorXd>& pre) {
    const std::size_t n_layers = net.layers.size();
    acts[0] = x;
    for (std::size_t l = 0; l < n_layers; ++l) {
        pre[l].noalias() = net.layers[l].weights * acts[l];
        pre[l] += net.layers[l].bias;
        if (l + 1 < n_layers) acts[l + 1] = pre[l].cwiseMax(0.0);
    }
    const double err = pre.back()(0) - y;
    Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, 2.0 * err * scale);
    for (std::size_t l = n_layers; l-- > 0;) {
        grad[l].weights.noalias() += delta * acts[l].transpose();
        grad[l].bias += delta;
        if (l == 0) break;
        Eigen::VectorXd back = net.layers[l].weights.transpose() * delta;
        for (Eigen::Index i = 0; i < back.size(); ++i)
            if (pre[l - 1](i) <= 0.0) back(i) = 0.0;
        delta = std::move(back);
    }
    return err * err;
}

Gradient gradient_range(const ReluNetwork& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        std::span<const int> rows, double scale) {
    Gradient g;
    g.layers = zeros_like(net);
    std::vector<Eigen::VectorXd> acts(net.layers.size());
    std::vector<Eigen::VectorXd> pre(net.layers.size());
    for (int r : rows) g.loss += scale * accumulate_sample(net, x.row(r).transpose(), y(r), scale, g.layers, acts, pre);
    return g;
}

void add_into(Gradient& into, const Gradient& g) {
    for (std::size_t l = 0; l < into.layers.size(); ++l) {
        into.layers[l].weights += g.layers[l].weights;
        into.layers[l].bias += g.layers[l].bias;
    }
    into.loss += g.loss;
}

DenseLayer random_layer(int out, int in, double sd, Rng& rng) {
    DenseLayer l{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int i = 0; i < out; ++i)
        for (int j = 0; j < in; ++j) l.weights(i, j) = rng.normal(0.0, sd);
    return l;
}

}  // namespace

double Gradient::norm() const {
    double sq = 0.0;
    for (const auto& l : layers) sq += l.weights.squaredNorm() + l.bias.squaredNorm();
    return std::sqrt(sq);
}

void Gradient::scale(double s) {
    for (auto& l : layers) {
        l.weights *= s;
        l.bias *= s;
    }
}

MlpVFA::MlpVFA(int inputs, std::vector<int> hidden, std::uint64_t seed) {
    if (inputs < 1) throw ValidationError("network", "at least one input is required");
    Rng rng(seed);
    int in = inputs;
    for (int h : hidden) {
        net_.layers.push_back(random_layer(h, in, std::sqrt(2.0 / in), rng));  // He initialization
        in = h;
    }
    net_.layers.push_back(random_layer(1, in, std::sqrt(1.0 / in), rng));
    in_mean_ = Eigen::VectorXd::Zero(inputs);
    in_scale_ = Eigen::VectorXd::Ones(inputs);
}

void MlpVFA::set_standardization(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    if (features.rows() == 0 || features.cols() != net_.input_size())
        throw ValidationError("features", "standardization data does not match the input layer");
    const double n = static_cast<double>(features.rows());
    in_mean_ = features.colwise().mean().transpose();
    in_scale_ = ((features.rowwise() - in_mean_.transpose()).array().square().colwise().sum() / n).sqrt().transpose();
    for (Eigen::Index j = 0; j < in_scale_.size(); ++j)
        if (!(in_scale_(j) > 1e-9)) in_scale_(j) = 1.0;
    out_mean_ = targets.mean();
    out_scale_ = std::sqrt((targets.array() - out_mean_).square().sum() / static_cast<double>(targets.size()));
    if (!(out_scale_ > 1e-9)) out_scale_ = 1.0;
}

void MlpVFA::set_standardization(Eigen::VectorXd in_mean, Eigen::VectorXd in_scale, double out_mean, double out_scale) {
    in_mean_ = std::move(in_mean);
    in_scale_ = std::move(in_scale);
    out_mean_ = out_mean;
    out_scale_ = out_scale;
}

Eigen::MatrixXd MlpVFA::standardize_inputs(const Eigen::MatrixXd& raw) const {
    return (raw.rowwise() - in_mean_.transpose()).array().rowwise() / in_scale_.transpose().array();
}

Eigen::VectorXd MlpVFA::standardize_targets(const Eigen::VectorXd& raw) const {
    return (raw.array() - out_mean_) / out_scale_;
}

double MlpVFA::forward(std::span<const double> raw) const {
    std::vector<double> x(raw.begin(), raw.end());
    for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = (x[j] - in_mean_(static_cast<Eigen::Index>(j))) / in_scale_(static_cast<Eigen::Index>(j));
    return out_mean_ + out_scale_ * net_.forward(x);
}

ReluNetwork MlpVFA::folded() const {
    ReluNetwork raw = net_;
    auto& first = raw.layers.front();
    const Eigen::VectorXd inv = in_scale_.cwiseInverse();
    first.bias -= first.weights * in_mean_.cwiseProduct(inv);
    first.weights = first.weights * inv.asDiagonal();
    auto& last = raw.layers.back();
    last.weights *= out_scale_;
    last.bias = last.bias * out_scale_ + Eigen::VectorXd::Constant(1, out_mean_);
    return raw;
}

Gradient mse_gradient_serial(const ReluNetwork& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             std::span<const int> rows) {
    if (rows.empty()) throw ValidationError("batch", "empty batch");
    return gradient_range(net, x, y, rows, 1.0 / static_cast<double>(rows.size()));
}

Gradient mse_gradient_parallel(const ReluNetwork& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               std::span<const int> rows) {
    if (rows.empty()) throw ValidationError("batch", "empty batch");
    const double scale = 1.0 / static_cast<double>(rows.size());
    const int chunks = (static_cast<int>(rows.size()) + kChunk - 1) / kChunk;
    std::vector<Gradient> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
    for (int c = 0; c < chunks; ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
        const std::size_t len = std::min<std::size_t>(kChunk, rows.size() - begin);
        partial[static_cast<std::size_t>(c)] = gradient_range(net, x, y, rows.subspan(begin, len), scale);
    }
    Gradient total = std::move(partial.front());
    for (std::size_t c = 1; c < partial.size(); ++c) add_into(total, partial[c]);
    return total;
}

double mse_loss(const ReluNetwork& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const int> rows) {
    double sum = 0.0;
    for (int r : rows) {
        const Eigen::VectorXd xr = x.row(r).transpose();
        const double e = net.forward(std::span<const double>(xr.data(), static_cast<std::size_t>(xr.size()))) - y(r);
        sum += e * e;
    }
    return sum / static_cast<double>(rows.size());
}

AdamOptimizer::AdamOptimizer(const ReluNetwork& shape, AdamConfig config)
    : config_(config), m_(zeros_like(shape)), v_(zeros_like(shape)) {}

bool AdamOptimizer::step(ReluNetwork& net, Gradient grad) {
    const double norm = grad.norm();
    if (!std::isfinite(norm) || !std::isfinite(grad.loss)) return false;
    if (norm > config_.clip_norm) grad.scale(config_.clip_norm / norm);
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const double lr = config_.learning_rate;
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.epsilon);
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        update(net.layers[l].weights, m_[l].weights, v_[l].weights, grad.layers[l].weights);
        update(net.layers[l].bias, m_[l].bias, v_[l].bias, grad.layers[l].bias);
    }
    return true;
}

TrainStats train_epoch(ReluNetwork& net, AdamOptimizer& opt, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       int batch_size, Rng& rng, bool parallel) {
    TrainStats stats;
    const int n = static_cast<int>(x.rows());
    if (n == 0) return stats;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    double loss_sum = 0.0;
    for (int start = 0; start < n; start += batch_size) {
        const int len = std::min(batch_size, n - start);
        const std::span<const int> batch(order.data() + start, static_cast<std::size_t>(len));
        Gradient g = parallel ? mse_gradient_parallel(net, x, y, batch) : mse_gradient_serial(net, x, y, batch);
        const double loss = g.loss;
        if (opt.step(net, std::move(g))) {
            loss_sum += loss;
            ++stats.batches;
        } else {
            ++stats.skipped;
        }
    }
    stats.mean_loss = stats.batches > 0 ? loss_sum / stats.batches : 0.0;
    return stats;
}

}  // namespace relief
