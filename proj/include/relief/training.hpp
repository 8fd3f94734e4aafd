#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "relief/learning/buffer.hpp"
#include "relief/learning/checkpoint.hpp"
#include "relief/policies.hpp"

namespace relief {

struct TrainingConfig {
    int episodes = 1000;  // R
    double discount = 0.9;
    double epsilon0 = 0.2;
    double epsilon_decay = 0.98;
    double alpha0 = 0.2;
    double alpha_decay = 0.99;
    int buffer_size = 1000;  // B, also the number of warm-up episodes
    int update_every = 10;   // u
    // network only
    double learning_rate = 0.001;
    int batch_size = 256;
    std::vector<int> hidden{16, 16};
    int pretrain_passes = 100;  // passes over the warm-up buffer before the first episode
    int passes_per_update = 1;
    // bookkeeping
    double time_cap_seconds = 14400.0;
    int curve_paths = 10;  // held-out paths per learning-curve point; 0 disables the curve
    SolverSettings solver;

    void validate() const;
};

struct CurvePoint {
    int episode = 0;
    double mean_cost = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
};

struct TrainingResult {
    Checkpoint checkpoint;
    std::vector<CurvePoint> curve;
    bool truncated = false;
    int episodes_done = 0;
    double seconds = 0.0;
    int skipped_batches = 0;
};

/// Decision trace of one training episode; exposed so exploration can be
/// compared against the warm-up heuristic.
using EpisodeObserver = std::function<void(int episode, const std::vector<Decision>& decisions)>;

/// Seeds of the sample paths used by training episode r (1-based) and by
/// warm-up episode b (0-based).
std::uint64_t training_path_seed(std::uint64_t seed, int episode);
std::uint64_t warmup_path_seed(std::uint64_t seed, int episode);

/// Stream of the exploration (warm-up step 3a) draws during training.
std::uint64_t exploration_seed(std::uint64_t seed);

/// Experience of one episode under `decide`, epochs 0..T.
Episode simulate_episode(const InstanceSpec& spec, const SamplePath& path,
                         const std::function<Decision(const State&)>& decide, std::vector<Decision>* decisions = nullptr);

/// Warm-start buffer of `count` warm-up episodes (B^0).
ExperienceBuffer warmup_buffer(const InstanceSpec& spec, int count, std::size_t capacity, std::uint64_t seed);

/// Per-(t, n) regression on the kept episodes of the buffer.
LinearVFA regress_linear(const ExperienceBuffer& buffer, const std::vector<std::size_t>& kept, const InstanceSpec& spec,
                         double discount);

/// Decomposed linear VFA training loop.
TrainingResult train_dl_vfa(const InstanceSpec& spec, const TrainingConfig& config, std::uint64_t seed,
                            const EpisodeObserver& observer = {});

/// Neural-network VFA training loop.
TrainingResult train_nn_vfa(const InstanceSpec& spec, const TrainingConfig& config, std::uint64_t seed,
                            const EpisodeObserver& observer = {});

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace relief
