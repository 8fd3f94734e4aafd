#include "relief/learning/buffer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relief/error.hpp"

namespace relief {

double Episode::total_cost() const {
    double total = 0.0;
    for (const auto& step : steps) total += std::accumulate(step.district_costs.begin(), step.district_costs.end(), 0.0);
    return total;
}

void ExperienceBuffer::push(Episode episode) {
    if (capacity_ == 0) return;
    if (episodes_.size() == capacity_) episodes_.pop_front();
    episodes_.push_back(std::move(episode));
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile", "no values");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<std::size_t> filter_outliers(const ExperienceBuffer& buffer) {
    std::vector<std::size_t> kept(buffer.size());
    std::iota(kept.begin(), kept.end(), 0);
    if (buffer.size() < 4) return kept;
    std::vector<double> costs;
    costs.reserve(buffer.size());
    for (const auto& e : buffer.episodes()) costs.push_back(e.total_cost());
    const double q1 = quantile(costs, 0.25);
    const double q3 = quantile(costs, 0.75);
    const double limit = q3 + 1.5 * (q3 - q1);
    kept.clear();
    for (std::size_t i = 0; i < costs.size(); ++i)
        if (costs[i] <= limit) kept.push_back(i);
    return kept;
}

std::vector<std::vector<double>> value_targets(const Episode& episode, double lambda) {
    const int horizon = episode.horizon();
    if (horizon < 1) throw ValidationError("episode", "an episode needs epochs 0..T with T >= 1");
    for (int t = 0; t <= horizon; ++t)
        if (episode.steps[static_cast<std::size_t>(t)].epoch != t)
            throw ValidationError("episode", "episode is incomplete or out of order at epoch " + std::to_string(t));
    const std::size_t n_districts = episode.steps.back().district_costs.size();
    std::vector<std::vector<double>> targets(static_cast<std::size_t>(horizon), std::vector<double>(n_districts));
    targets.back() = episode.steps.back().district_costs;
    for (int t = horizon - 2; t >= 0; --t) {
        const auto& next_costs = episode.steps[static_cast<std::size_t>(t + 1)].district_costs;
        for (std::size_t n = 0; n < n_districts; ++n)
            targets[static_cast<std::size_t>(t)][n] = next_costs[n] + lambda * targets[static_cast<std::size_t>(t + 1)][n];
    }
    return targets;
}

}  // namespace relief
