#pragma once

// Exact references for the tiny single-district instance: a memoized dynamic
// program and exhaustive enumeration of decision sequences. Both restate the
// dynamics by hand instead of calling the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <tuple>
#include <vector>

#include "relief/domain.hpp"
#include "relief/instances.hpp"

namespace tiny {

using relief::Units;

struct Data {
    double uav_cost = 0.1;
    double truck_cost = 0.2;
    double rate = 0.065;
    std::vector<Units> supply;  // arrival at t = 0..T
    std::vector<Units> demand;  // demand of period t = 1..T at index t
};

inline relief::InstanceSpec instance(const Data& d) {
    relief::InstanceSpec s;
    s.name = "tiny";
    s.district_names = {"1"};
    s.modes = {{"uav", relief::ModeKind::Uav, 2}, {"truck", relief::ModeKind::Truck, 5}};
    s.transport_cost = {{d.uav_cost, d.truck_cost}};
    s.horizon = static_cast<int>(d.supply.size()) - 1;
    for (int p = 1; p <= s.horizon; ++p) s.demand_mean.push_back({static_cast<double>(d.demand[static_cast<std::size_t>(p)])});
    for (Units v : d.supply) s.supply_mean.push_back(static_cast<double>(v));
    s.demand_cov = 0.0;
    s.supply_cov = 0.0;
    s.deprivation_rate = d.rate;
    return s;
}

inline relief::SamplePath path(const Data& d) {
    relief::SamplePath p;
    const auto T = d.supply.size() - 1;
    for (std::size_t t = 0; t <= T; ++t) {
        relief::ExogenousEvent e;
        e.supply_arrival = d.supply[t];
        e.realized_demand = {t == 0 ? 0 : d.demand[t]};
        e.next_forecast = {t < T ? static_cast<double>(d.demand[t + 1]) : 0.0};
        e.next_forecast_std = {0.0};
        p.events.push_back(e);
    }
    return p;
}

inline double gamma(const Data& d, int delta) { return delta < 0 ? 0.0 : std::exp(d.rate * delta) - 1.0; }
inline double g(const Data& d, int delta) { return std::max(0.0, gamma(d, delta) - gamma(d, delta - 1)); }

inline double transport(const Data& d, Units xu, Units xt) {
    return static_cast<double>((xu + 1) / 2) * d.uav_cost + static_cast<double>((xt + 4) / 5) * d.truck_cost;
}

/// Optimal total cost from S_0 by backward recursion over (t, cw, I, h, delta).
inline double exact_dp(const Data& d) {
    const int T = static_cast<int>(d.supply.size()) - 1;
    std::map<std::tuple<int, Units, Units, Units, int>, double> memo;
    std::function<double(int, Units, Units, Units, int)> value = [&](int t, Units cw, Units inv, Units h, int delta) {
        const double here = g(d, delta) * static_cast<double>(h);
        if (t == T) return here;
        const auto key = std::make_tuple(t, cw, inv, h, delta);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        double best = std::numeric_limits<double>::infinity();
        for (Units xu = 0; xu <= cw; ++xu)
            for (Units xt = 0; xu + xt <= cw; ++xt) {
                const Units post = inv + xu + xt;
                const Units dem = d.demand[static_cast<std::size_t>(t + 1)];
                const Units ni = std::max<Units>(0, post - dem);
                const Units nh = std::max<Units>(0, dem - post);
                const int nd = post <= dem ? delta + 1 : 0;
                const double c = transport(d, xu, xt) +
                                 value(t + 1, cw - xu - xt + d.supply[static_cast<std::size_t>(t + 1)], ni, nh, nd);
                best = std::min(best, c);
            }
        memo[key] = here + best;
        return here + best;
    };
    return value(0, d.supply[0], 0, 0, 0);
}

/// Minimum over every decision sequence, evaluated forward without memoization.
inline double enumerate_sequences(const Data& d) {
    const int T = static_cast<int>(d.supply.size()) - 1;
    double best = std::numeric_limits<double>::infinity();
    std::function<void(int, Units, Units, Units, int, double)> walk = [&](int t, Units cw, Units inv, Units h, int delta,
                                                                          double acc) {
        acc += g(d, delta) * static_cast<double>(h);
        if (t == T) {
            best = std::min(best, acc);
            return;
        }
        for (Units xu = 0; xu <= cw; ++xu)
            for (Units xt = 0; xu + xt <= cw; ++xt) {
                const Units post = inv + xu + xt;
                const Units dem = d.demand[static_cast<std::size_t>(t + 1)];
                walk(t + 1, cw - xu - xt + d.supply[static_cast<std::size_t>(t + 1)], std::max<Units>(0, post - dem),
                     std::max<Units>(0, dem - post), post <= dem ? delta + 1 : 0, acc + transport(d, xu, xt));
            }
    };
    walk(0, d.supply[0], 0, 0, 0, 0.0);
    return best;
}

/// Deterministic family of tiny paths (T = 4, supplies <= 6).
inline Data make(std::uint64_t seed, double uav_cost = 0.1, double truck_cost = 0.2) {
    Data d;
    d.uav_cost = uav_cost;
    d.truck_cost = truck_cost;
    std::uint64_t s = seed * 0x9e3779b97f4a7c15ULL + 1;
    auto next = [&](int mod) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return static_cast<Units>(s % static_cast<std::uint64_t>(mod));
    };
    d.supply = {next(5), next(4), next(4), next(4), next(7)};
    d.demand = {0, next(5), next(5), next(6), next(6)};
    return d;
}

}  // namespace tiny
