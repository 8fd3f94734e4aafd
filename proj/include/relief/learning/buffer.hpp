#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

namespace relief {

/// What is stored for one epoch of one episode.
struct Experience {
    int epoch = 0;
    /// Post-decision features; empty at the terminal epoch.
    std::vector<std::array<double, 3>> linear;
    std::vector<double> neural;
    /// Direct cost per district at this epoch (deprivation plus own transport).
    std::vector<double> district_costs;
};

/// Epochs 0..T of one simulated episode.
struct Episode {
    std::uint64_t id = 0;
    std::vector<Experience> steps;

    double total_cost() const;
    int horizon() const { return static_cast<int>(steps.size()) - 1; }
};

/// FIFO ring of whole episodes.
class ExperienceBuffer {
public:
    explicit ExperienceBuffer(std::size_t capacity) : capacity_(capacity) {}

    /// Appends, evicting the oldest episode when full.
    void push(Episode episode);

    std::size_t size() const noexcept { return episodes_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    const Episode& operator[](std::size_t i) const { return episodes_[i]; }
    const std::deque<Episode>& episodes() const noexcept { return episodes_; }

private:
    std::size_t capacity_;
    std::deque<Episode> episodes_;
};

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Indices of the episodes kept after dropping those with total cost above
/// Q3 + 1.5 IQR. With fewer than four episodes nothing is dropped.
std::vector<std::size_t> filter_outliers(const ExperienceBuffer& buffer);

/// Realized discounted future cost per (t, n), t = 0..T-1, attached to the
/// post-decision state of epoch t: V(T-1) = C(T), V(t) = C(t+1) + lambda V(t+1).
std::vector<std::vector<double>> value_targets(const Episode& episode, double lambda);

}  // namespace relief
