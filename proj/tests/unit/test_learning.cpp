#include <cmath>
#include <numeric>
#include <random>

#include "../support/gradcheck.hpp"
#include "doctest.h"
#include "relief/error.hpp"
#include "relief/learning/buffer.hpp"
#include "relief/learning/checkpoint.hpp"
#include "relief/learning/linear.hpp"
#include "relief/learning/mlp.hpp"

using namespace relief;

namespace {

// Episode with one district whose cost at epoch t is costs[t].
Episode one_district(const std::vector<double>& costs, std::uint64_t id = 0) {
    Episode e;
    e.id = id;
    for (std::size_t t = 0; t < costs.size(); ++t) e.steps.push_back(Experience{static_cast<int>(t), {}, {}, {costs[t]}});
    return e;
}

ExperienceBuffer buffer_of(const std::vector<double>& totals) {
    ExperienceBuffer b(totals.size() + 10);
    for (std::size_t i = 0; i < totals.size(); ++i) b.push(one_district({totals[i], 0.0}, i));
    return b;
}

}  // namespace

TEST_CASE("value targets") {
    SUBCASE("hand recursion") {
        const auto v = value_targets(one_district({0, 10, 20, 30}), 0.9);
        REQUIRE(v.size() == 3);
        CHECK(v[2][0] == doctest::Approx(30));
        CHECK(v[1][0] == doctest::Approx(20 + 0.9 * 30));
        CHECK(v[0][0] == doctest::Approx(52.3).epsilon(1e-12));
    }
    SUBCASE("zero costs") {
        for (const auto& row : value_targets(one_district({0, 0, 0, 0}), 0.9)) CHECK(row[0] == 0.0);
    }
    SUBCASE("no discounting of the future") {
        const auto v = value_targets(one_district({5, 10, 20, 30}), 0.0);
        CHECK(v[0][0] == 10);
        CHECK(v[1][0] == 20);
        CHECK(v[2][0] == 30);
    }
    SUBCASE("linear in costs") {
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> u(0, 100);
        std::vector<double> c(8);
        for (auto& x : c) x = u(gen);
        std::vector<double> c3 = c;
        for (auto& x : c3) x *= 3.0;
        const auto a = value_targets(one_district(c), 0.9);
        const auto b = value_targets(one_district(c3), 0.9);
        for (std::size_t t = 0; t < a.size(); ++t) CHECK(b[t][0] == doctest::Approx(3.0 * a[t][0]).epsilon(1e-12));
    }
    SUBCASE("incomplete episodes are rejected") {
        Episode e = one_district({1, 2, 3});
        e.steps.erase(e.steps.begin() + 1);
        CHECK_THROWS_AS(value_targets(e, 0.9), ValidationError);
        CHECK_THROWS_AS(value_targets(one_district({1}), 0.9), ValidationError);
    }
}

TEST_CASE("experience buffer") {
    SUBCASE("fifo eviction keeps the newest episodes in order") {
        ExperienceBuffer b(5);
        for (std::uint64_t i = 0; i < 12; ++i) b.push(one_district({1, 2}, i));
        REQUIRE(b.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) CHECK(b[i].id == 7 + i);
    }
    SUBCASE("outlier filter examples") {
        CHECK(filter_outliers(buffer_of({10, 10, 10, 10, 10})).size() == 5);
        CHECK(filter_outliers(buffer_of({10, 10, 10, 10, 1000})) == std::vector<std::size_t>{0, 1, 2, 3});
        CHECK(filter_outliers(buffer_of({1, 1, 1000})).size() == 3);
        CHECK(quantile({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
    }
    SUBCASE("filter keeps at least three quarters of iid costs") {
        std::mt19937_64 gen(11);
        std::lognormal_distribution<double> heavy(8.0, 0.8);
        std::exponential_distribution<double> expo(1e-3);
        std::normal_distribution<double> normal(5000, 800);
        for (int rep = 0; rep < 5; ++rep) {
            for (int dist = 0; dist < 3; ++dist) {
                std::vector<double> totals(1000);
                for (auto& x : totals) x = dist == 0 ? heavy(gen) : dist == 1 ? expo(gen) : normal(gen);
                CHECK(filter_outliers(buffer_of(totals)).size() >= 750);
            }
        }
    }
}

TEST_CASE("linear regression") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> inv(0, 1000), dep(0, 10), cost(0, 50);
    SUBCASE("exact linear data is recovered") {
        std::vector<LinearRecord> recs;
        for (int i = 0; i < 200; ++i) {
            std::array<double, 3> f{inv(gen), std::round(dep(gen)), cost(gen)};
            recs.push_back({f, 7.0 + 2.0 * f[0] - 5.0 * f[1] + 3.0 * f[2]});
        }
        const auto w = fit_linear(recs);
        CHECK(w[0] == doctest::Approx(7.0).epsilon(1e-6));
        CHECK(w[1] == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(w[2] == doctest::Approx(-5.0).epsilon(1e-6));
        CHECK(w[3] == doctest::Approx(3.0).epsilon(1e-6));
    }
    SUBCASE("single record is interpolated") {
        const LinearRecord r{{250.0, 3.0, 12.5}, 418.0};
        const auto w = fit_linear(std::span<const LinearRecord>(&r, 1));
        const double fit = w[0] + w[1] * 250.0 + w[2] * 3.0 + w[3] * 12.5;
        CHECK(std::abs(fit - 418.0) < 1e-6);
    }
    SUBCASE("noisy synthetic data") {
        std::normal_distribution<double> noise(0, 0.01);
        std::vector<LinearRecord> recs;
        for (int i = 0; i < 500; ++i) {
            std::array<double, 3> f{inv(gen), std::round(dep(gen)), cost(gen)};
            recs.push_back({f, 2.0 * f[0] - 5.0 * f[1] + 3.0 * f[2] + noise(gen)});
        }
        const auto w = fit_linear(recs);
        CHECK(std::abs(w[1] - 2.0) < 0.05);
        CHECK(std::abs(w[2] + 5.0) < 0.05);
        CHECK(std::abs(w[3] - 3.0) < 0.05);
    }
    SUBCASE("constant feature columns stay solvable") {
        std::vector<LinearRecord> recs(20, LinearRecord{{0.0, 0.0, 0.0}, 4.0});
        const auto w = fit_linear(recs);
        CHECK(w[0] == doctest::Approx(4.0));
        for (int j = 1; j < 4; ++j) CHECK(std::isfinite(w[static_cast<std::size_t>(j)]));
    }
}

TEST_CASE("weight smoothing") {
    const DistrictWeights zero{}, ten{10, 10, 10, 10}, a{1, -2, 3, 4};
    CHECK(smooth_weights(a, ten, 0.0) == a);
    CHECK(smooth_weights(a, ten, 1.0) == ten);
    CHECK(smooth_weights(zero, ten, 0.2)[0] == doctest::Approx(2.0));
    CHECK_THROWS_AS(smooth_weights(a, ten, 1.5), ValidationError);
    // contraction toward the fresh estimate
    for (double alpha : {0.1, 0.5, 0.9}) {
        const auto s = smooth_weights(a, ten, alpha);
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(s[i] - ten[i]) <= (1 - alpha) * std::abs(a[i] - ten[i]) + 1e-12);
    }
}

TEST_CASE("mlp forward and folding") {
    SUBCASE("zero weights give the output bias") {
        MlpVFA m(5, {16, 16}, 1);
        for (auto& l : m.network().layers) {
            l.weights.setZero();
            l.bias.setZero();
        }
        m.network().layers.back().bias(0) = 3.5;
        const std::vector<double> x{1, 2, 3, 4, 5};
        CHECK(m.forward(x) == 3.5);
        CHECK(m.folded().forward(x) == 3.5);
    }
    SUBCASE("folding preserves the output") {
        std::mt19937_64 gen(9);
        std::uniform_real_distribution<double> u(0, 1);
        const int inputs = 11;
        Eigen::MatrixXd feats(500, inputs);
        Eigen::VectorXd targets(500);
        for (Eigen::Index r = 0; r < feats.rows(); ++r) {
            for (int j = 0; j < inputs; ++j) feats(r, j) = u(gen) * (j == 1 ? 5000.0 : 100.0 * (j + 1));
            targets(r) = 1e4 * u(gen);
        }
        feats.col(2).setConstant(7.0);  // zero variance column
        MlpVFA m(inputs, {16, 16}, 4);
        m.set_standardization(feats, targets);
        CHECK(m.input_scale()(2) == 1.0);
        const ReluNetwork raw = m.folded();
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            std::vector<double> x(inputs);
            for (int j = 0; j < inputs; ++j) x[static_cast<std::size_t>(j)] = u(gen) * 3000.0;
            const double a = m.forward(x), b = raw.forward(x);
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
        CHECK(worst < 1e-8);
    }
    SUBCASE("seeded construction is reproducible") {
        CHECK(MlpVFA(11, {16, 16}, 42) == MlpVFA(11, {16, 16}, 42));
        CHECK_FALSE(MlpVFA(11, {16, 16}, 42) == MlpVFA(11, {16, 16}, 43));
    }
}

TEST_CASE("backprop gradient") {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> nd(0, 1);
    SUBCASE("matches finite differences") {
        for (int trial = 0; trial < 10; ++trial) {
            const auto net = gradcheck::random_network(gen, 5, {16, 16, 1});
            Eigen::MatrixXd x(8, 5);
            Eigen::VectorXd y(8);
            for (Eigen::Index r = 0; r < 8; ++r) {
                for (int j = 0; j < 5; ++j) x(r, j) = nd(gen);
                y(r) = nd(gen);
            }
            const auto res = gradcheck::check(net, x, y);
            CHECK(res.max_rel_error < 1e-4);
            CHECK(res.checked > 9 * (res.checked + res.skipped) / 10);
        }
    }
    SUBCASE("chunked parallel sum equals the serial sum") {
        const auto net = gradcheck::random_network(gen, 11, {16, 16, 1});
        Eigen::MatrixXd x(300, 11);
        Eigen::VectorXd y(300);
        for (Eigen::Index r = 0; r < 300; ++r) {
            for (int j = 0; j < 11; ++j) x(r, j) = nd(gen);
            y(r) = nd(gen);
        }
        std::vector<int> rows(256);
        std::iota(rows.begin(), rows.end(), 20);
        const auto s = mse_gradient_serial(net, x, y, rows);
        const auto p = mse_gradient_parallel(net, x, y, rows);
        CHECK(p.loss == doctest::Approx(s.loss).epsilon(1e-12));
        CHECK(p.loss == doctest::Approx(mse_loss(net, x, y, rows)).epsilon(1e-12));
        for (std::size_t l = 0; l < s.layers.size(); ++l)
            CHECK((p.layers[l].weights - s.layers[l].weights).cwiseAbs().maxCoeff() < 1e-12);
        // the result does not depend on the thread count
        const auto again = mse_gradient_parallel(net, x, y, rows);
        for (std::size_t l = 0; l < s.layers.size(); ++l) CHECK(again.layers[l] == p.layers[l]);
    }
    SUBCASE("clipping and non-finite guard") {
        auto net = gradcheck::random_network(gen, 3, {4, 1});
        AdamOptimizer opt(net, AdamConfig{});
        Gradient g;
        for (const auto& l : net.layers)
            g.layers.push_back({Eigen::MatrixXd::Constant(l.weights.rows(), l.weights.cols(), 1e6),
                                Eigen::VectorXd::Constant(l.bias.size(), 1e6)});
        const auto before = net;
        CHECK(opt.step(net, g));
        // Adam steps are bounded by the learning rate regardless of scale
        CHECK((net.layers[0].weights - before.layers[0].weights).cwiseAbs().maxCoeff() <= 0.001 + 1e-12);
        g.loss = std::nan("");
        const auto kept = net;
        CHECK_FALSE(opt.step(net, g));
        CHECK(net == kept);
    }
}

TEST_CASE("mlp learns the feature sum") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0, 1);
    const int inputs = 11, n = 10000;
    Eigen::MatrixXd x(n, inputs);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
        for (int j = 0; j < inputs; ++j) x(r, j) = u(gen) * 100.0 * (j + 1);
        y(r) = x.row(r).sum();
    }
    const int train = 8000;
    MlpVFA m(inputs, {16, 16}, 2);
    m.set_standardization(x.topRows(train), y.head(train));
    const Eigen::MatrixXd xs = m.standardize_inputs(x);
    const Eigen::VectorXd ys = m.standardize_targets(y);
    AdamOptimizer opt(m.network(), AdamConfig{});
    Rng rng(1);
    const Eigen::MatrixXd xtr = xs.topRows(train);
    const Eigen::VectorXd ytr = ys.head(train);
    for (int pass = 0; pass < 200; ++pass) train_epoch(m.network(), opt, xtr, ytr, 256, rng);
    std::vector<int> held(n - train);
    std::iota(held.begin(), held.end(), train);
    const double mse = mse_loss(m.folded(), x, y, held);
    const double var = (y.tail(n - train).array() - y.tail(n - train).mean()).square().mean();
    MESSAGE("held-out mse / variance = " << mse / var);
    CHECK(mse < 0.01 * var);
}

TEST_CASE("checkpoints round trip exactly") {
    SUBCASE("linear") {
        Checkpoint c{"dl-vfa", "districts-3", 77, 120, true, LinearVFA(30, 3), std::nullopt};
        std::mt19937_64 gen(1);
        std::normal_distribution<double> nd(0, 1e3);
        for (auto& row : c.linear->weights)
            for (auto& w : row)
                for (auto& v : w) v = nd(gen);
        CHECK(parse_checkpoint(checkpoint_to_json(c)) == c);
    }
    SUBCASE("network") {
        MlpVFA m(11, {16, 16}, 5);
        Eigen::MatrixXd f = Eigen::MatrixXd::Random(50, 11) * 1e3;
        Eigen::VectorXd t = Eigen::VectorXd::Random(50) * 1e4;
        m.set_standardization(f, t);
        Checkpoint c{"nn-vfa", "districts-3", 1, 0, false, std::nullopt, m};
        const auto back = parse_checkpoint(checkpoint_to_json(c));
        CHECK(back == c);
        CHECK(back.mlp->network().layers.size() == 3);
    }
    SUBCASE("bad files") {
        CHECK_THROWS_AS(parse_checkpoint("{"), ValidationError);
        CHECK_THROWS_AS(parse_checkpoint(R"({"format":"relief-vfa","version":99,"method":"dl-vfa"})"), ValidationError);
        CHECK_THROWS_AS(parse_checkpoint(R"({"format":"relief-vfa","version":1,"method":"dl-vfa"})"), ValidationError);
    }
}
