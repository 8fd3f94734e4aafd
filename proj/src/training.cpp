#include "relief/training.hpp"

#include <chrono>
#include <cmath>

#include "relief/error.hpp"
#include "relief/harness.hpp"

namespace relief {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

CurvePoint evaluate_curve(const Policy& policy, const InstanceSpec& spec, const TrainingConfig& config,
                          std::uint64_t seed, int episode) {
    std::vector<std::uint64_t> seeds;
    const std::uint64_t master = derive_seed(seed, "curve");
    for (int i = 0; i < config.curve_paths; ++i) seeds.push_back(evaluation_path_seed(master, i));
    const auto report = benchmark({&policy}, spec, seeds);
    const auto& row = report.rows.front();
    return {episode, row.mean_total, row.ci95_low, row.ci95_high};
}

// Epsilon-greedy episode runner shared by both methods.
struct Explorer {
    const InstanceSpec& spec;
    Rng coin;
    Rng draws;
    Rng unused{0};

    Episode run(Policy& greedy, double epsilon, const SamplePath& path, std::vector<Decision>* decisions) {
        return simulate_episode(
            spec, path,
            [&](const State& s) {
                if (coin.uniform01() < epsilon) return warmup_decide(s, spec, draws);
                return greedy.decide(s, unused);
            },
            decisions);
    }
};

// Neural inputs and summed value targets of the kept episodes.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> neural_dataset(const ExperienceBuffer& buffer,
                                                           const std::vector<std::size_t>& kept, int inputs,
                                                           double discount) {
    std::size_t rows = 0;
    for (std::size_t i : kept) rows += static_cast<std::size_t>(buffer[i].horizon());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), inputs);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    Eigen::Index r = 0;
    for (std::size_t i : kept) {
        const Episode& e = buffer[i];
        const auto targets = value_targets(e, discount);
        for (int t = 0; t < e.horizon(); ++t, ++r) {
            const auto& f = e.steps[static_cast<std::size_t>(t)].neural;
            for (int j = 0; j < inputs; ++j) x(r, j) = f[static_cast<std::size_t>(j)];
            double total = 0.0;
            for (double v : targets[static_cast<std::size_t>(t)]) total += v;
            y(r) = total;
        }
    }
    return {std::move(x), std::move(y)};
}

}  // namespace

void TrainingConfig::validate() const {
    if (episodes < 0) throw ValidationError("episodes", "must be >= 0");
    if (!(discount > 0.0 && discount <= 1.0)) throw ValidationError("discount", "must lie in (0, 1]");
    for (double v : {epsilon0, epsilon_decay, alpha0, alpha_decay})
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("epsilon/alpha", "rates and decays must lie in [0, 1]");
    if (buffer_size < 1) throw ValidationError("buffer", "must be >= 1");
    if (update_every < 1) throw ValidationError("update-every", "must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("learning-rate", "must be positive");
    if (batch_size < 1) throw ValidationError("batch-size", "must be >= 1");
    for (int h : hidden)
        if (h < 1) throw ValidationError("hidden", "layer widths must be positive");
    if (!(time_cap_seconds > 0.0)) throw ValidationError("time-cap", "must be positive");
    if (curve_paths < 0) throw ValidationError("curve-paths", "must be >= 0");
}

std::uint64_t training_path_seed(std::uint64_t seed, int episode) {
    return derive_seed(derive_seed(seed, "training"), {static_cast<std::uint64_t>(episode)});
}

std::uint64_t warmup_path_seed(std::uint64_t seed, int episode) {
    return derive_seed(derive_seed(seed, "warmup"), {static_cast<std::uint64_t>(episode)});
}

std::uint64_t exploration_seed(std::uint64_t seed) { return derive_seed(seed, "exploration"); }

Episode simulate_episode(const InstanceSpec& spec, const SamplePath& path,
                         const std::function<Decision(const State&)>& decide, std::vector<Decision>* decisions) {
    Episode episode;
    episode.id = path.seed;
    State state = initial_state(spec, path.events.front());
    for (int t = 0; t <= spec.horizon; ++t) {
        const Decision x = t < spec.horizon ? decide(state) : Decision(spec.num_districts(), spec.num_modes());
        check_feasible(state, x, spec);
        const PostDecisionState post = apply_decision(state, x, spec);
        Experience step;
        step.epoch = t;
        step.district_costs = district_direct_costs(state, x, spec);
        if (t < spec.horizon) {
            FeatureVector f = extract_features(post, spec.deprivation_rate);
            step.linear = std::move(f.linear);
            step.neural = std::move(f.neural);
            state = advance(post, path.events[static_cast<std::size_t>(t + 1)]);
        }
        if (decisions) decisions->push_back(x);
        episode.steps.push_back(std::move(step));
    }
    return episode;
}

ExperienceBuffer warmup_buffer(const InstanceSpec& spec, int count, std::size_t capacity, std::uint64_t seed) {
    ExperienceBuffer buffer(capacity);
    Rng draws(derive_seed(seed, "warmup-draws"));
    for (int b = 0; b < count; ++b) {
        const SamplePath path = generate_path(spec, warmup_path_seed(seed, b));
        buffer.push(simulate_episode(spec, path, [&](const State& s) { return warmup_decide(s, spec, draws); }));
    }
    return buffer;
}

LinearVFA regress_linear(const ExperienceBuffer& buffer, const std::vector<std::size_t>& kept, const InstanceSpec& spec,
                         double discount) {
    const int horizon = spec.horizon, districts = spec.num_districts();
    std::vector<std::vector<std::vector<LinearRecord>>> records(
        static_cast<std::size_t>(horizon), std::vector<std::vector<LinearRecord>>(static_cast<std::size_t>(districts)));
    for (std::size_t i : kept) {
        const Episode& e = buffer[i];
        const auto targets = value_targets(e, discount);
        for (int t = 0; t < horizon; ++t)
            for (int n = 0; n < districts; ++n)
                records[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)].push_back(
                    {e.steps[static_cast<std::size_t>(t)].linear[static_cast<std::size_t>(n)],
                     targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)]});
    }
    LinearVFA vfa(horizon, districts);
    for (int t = 0; t < horizon; ++t)
        for (int n = 0; n < districts; ++n) {
            const auto& recs = records[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)];
            if (!recs.empty()) vfa.weights[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)] = fit_linear(recs);
        }
    return vfa;
}

TrainingResult train_dl_vfa(const InstanceSpec& spec, const TrainingConfig& config, std::uint64_t seed,
                            const EpisodeObserver& observer) {
    config.validate();
    const auto start = Clock::now();
    TrainingResult result;
    ExperienceBuffer buffer = warmup_buffer(spec, config.buffer_size, static_cast<std::size_t>(config.buffer_size), seed);
    LinearVFA vfa = regress_linear(buffer, filter_outliers(buffer), spec, config.discount);
    auto policy = std::make_unique<DlVfaPolicy>(spec, vfa, config.solver);
    if (config.curve_paths > 0) result.curve.push_back(evaluate_curve(*policy, spec, config, seed, 0));

    Explorer explorer{spec, Rng(derive_seed(seed, "epsilon")), Rng(exploration_seed(seed))};
    double epsilon = config.epsilon0, alpha = config.alpha0;
    for (int r = 1; r <= config.episodes; ++r) {
        if (since(start) > config.time_cap_seconds) {
            result.truncated = true;
            break;
        }
        const SamplePath path = generate_path(spec, training_path_seed(seed, r));
        std::vector<Decision> decisions;
        buffer.push(explorer.run(*policy, epsilon, path, observer ? &decisions : nullptr));
        if (observer) observer(r, decisions);
        result.episodes_done = r;
        if (r % config.update_every != 0) continue;
        const LinearVFA fresh = regress_linear(buffer, filter_outliers(buffer), spec, config.discount);
        for (std::size_t t = 0; t < vfa.weights.size(); ++t)
            for (std::size_t n = 0; n < vfa.weights[t].size(); ++n)
                vfa.weights[t][n] = smooth_weights(vfa.weights[t][n], fresh.weights[t][n], alpha);
        policy = std::make_unique<DlVfaPolicy>(spec, vfa, config.solver);
        epsilon *= config.epsilon_decay;
        alpha *= config.alpha_decay;
        if (config.curve_paths > 0) result.curve.push_back(evaluate_curve(*policy, spec, config, seed, r));
    }
    result.checkpoint = Checkpoint{"dl-vfa", spec.name, seed, result.episodes_done, result.truncated, vfa, std::nullopt};
    result.seconds = since(start);
    return result;
}

TrainingResult train_nn_vfa(const InstanceSpec& spec, const TrainingConfig& config, std::uint64_t seed,
                            const EpisodeObserver& observer) {
    config.validate();
    const auto start = Clock::now();
    TrainingResult result;
    const int inputs = 2 + 3 * spec.num_districts();
    ExperienceBuffer buffer = warmup_buffer(spec, config.buffer_size, static_cast<std::size_t>(config.buffer_size), seed);

    MlpVFA vfa(inputs, config.hidden, derive_seed(seed, "network"));
    {
        // standardization is fixed once from the warm-up buffer
        const auto [x, y] = neural_dataset(buffer, filter_outliers(buffer), inputs, config.discount);
        vfa.set_standardization(x, y);
    }
    AdamConfig adam;
    adam.learning_rate = config.learning_rate;
    AdamOptimizer opt(vfa.network(), adam);
    Rng shuffle(derive_seed(seed, "minibatch"));
    auto train = [&](int passes) {
        const auto [x, y] = neural_dataset(buffer, filter_outliers(buffer), inputs, config.discount);
        const Eigen::MatrixXd xs = vfa.standardize_inputs(x);
        const Eigen::VectorXd ys = vfa.standardize_targets(y);
        for (int p = 0; p < passes; ++p)
            result.skipped_batches += train_epoch(vfa.network(), opt, xs, ys, config.batch_size, shuffle).skipped;
    };
    train(config.pretrain_passes);
    auto policy = std::make_unique<NnVfaPolicy>(spec, vfa, config.solver);
    if (config.curve_paths > 0) result.curve.push_back(evaluate_curve(*policy, spec, config, seed, 0));

    Explorer explorer{spec, Rng(derive_seed(seed, "epsilon")), Rng(exploration_seed(seed))};
    double epsilon = config.epsilon0;
    for (int r = 1; r <= config.episodes; ++r) {
        if (since(start) > config.time_cap_seconds) {
            result.truncated = true;
            break;
        }
        const SamplePath path = generate_path(spec, training_path_seed(seed, r));
        std::vector<Decision> decisions;
        buffer.push(explorer.run(*policy, epsilon, path, observer ? &decisions : nullptr));
        if (observer) observer(r, decisions);
        result.episodes_done = r;
        if (r % config.update_every != 0) continue;
        train(config.passes_per_update);
        policy = std::make_unique<NnVfaPolicy>(spec, vfa, config.solver);
        epsilon *= config.epsilon_decay;
        if (config.curve_paths > 0) result.curve.push_back(evaluate_curve(*policy, spec, config, seed, r));
    }
    result.checkpoint = Checkpoint{"nn-vfa", spec.name, seed, result.episodes_done, result.truncated, std::nullopt, vfa};
    result.seconds = since(start);
    return result;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "episode,mean_cost,ci95_low,ci95_high\n";
    for (const auto& p : curve)
        out << p.episode << ',' << format_number(p.mean_cost) << ',' << format_number(p.ci95_low) << ','
            << format_number(p.ci95_high) << '\n';
}

}  // namespace relief
