#pragma once

#include "gridimpact/dsm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace testing_support
{

inline constexpr std::size_t kSmallSteps = 8;
inline constexpr int kLevels = 5;

/// A building, a water tank and an electric vehicle over eight hourly steps.
inline gridimpact::CoordinationProblem small_coordination_problem()
{
    using namespace gridimpact;
    std::size_t const K = kSmallSteps;
    CoordinationProblem pb;
    pb.steps = K;
    pb.fixed_kw = {2, 2, 3, 6, 7, 3, 2, 2};

    {
        ThermalStore b;
        b.name = "building";
        double const r = 4, c = 4, dt = 1, theta = 0;
        b.a = std::exp(-dt / (r * c));
        b.gain = (1 - b.a) * r;
        b.initial = 20.5;
        b.offset.assign(K, (1 - b.a) * theta);
        b.lower.assign(K, 19.5);
        b.upper.assign(K, 22.0);
        b.slack_below.assign(K, 0.0);
        b.slack_above.assign(K, 0.0);
        b.sources.push_back({"hp", 1.0, std::vector<double>(K, 8.0), std::vector<double>(K, 2.5)});
        pb.thermal.push_back(b);
    }
    {
        ThermalStore t;
        t.name = "tank";
        t.category = LoadCategory::Water;
        double const r = 120, c = 0.2, dt = 1, ambient = 20;
        std::array<double, K> draw{0, 0.8, 0, 0, 0, 0.6, 0.4, 0};
        t.a = std::exp(-dt / (r * c));
        t.gain = (1 - t.a) * r;
        t.initial = 50;
        for (std::size_t k = 0; k < K; ++k)
        {
            t.offset.push_back((1 - t.a) * (ambient - r * draw[k]));
        }
        t.lower.assign(K, 45.0);
        t.upper.assign(K, 52.0);
        t.slack_below.assign(K, 0.0);
        t.slack_above.assign(K, 0.0);
        t.sources.push_back({"element", 1.0, std::vector<double>(K, 2.0), std::vector<double>(K, 1.0)});
        pb.thermal.push_back(t);
    }
    {
        BatteryStore e;
        e.name = "ev";
        e.a = 1.0;
        e.gain = 1.0;
        e.efficiency = 0.9;
        e.capacity_kwh = 60;
        e.initial = 40;
        e.charge_cap_kw.assign(K, 4.0);
        e.charge_cap_kw[3] = e.charge_cap_kw[4] = 0.0;
        e.drive_kw.assign(K, 0.0);
        e.min_energy.assign(K, 0.0);
        e.min_energy[K - 1] = 52;
        e.unserved_cap.assign(K, 0.0);
        pb.batteries.push_back(e);
    }
    return pb;
}

/// Electric power per step of every band-feasible schedule of one thermal
/// store whose source runs at levels 0, 1/4, ..., 1 of capacity.
inline std::vector<std::array<double, kSmallSteps>> feasible_thermal_schedules(gridimpact::ThermalStore const& st)
{
    std::vector<std::array<double, kSmallSteps>> out;
    std::array<double, kSmallSteps> power{};
    auto const& src = st.sources.at(0);
    std::function<void(std::size_t, double)> dfs = [&](std::size_t k, double x) {
        if (k == kSmallSteps)
        {
            out.push_back(power);
            return;
        }
        for (int l = 0; l < kLevels; ++l)
        {
            double const q = src.cap_kw[k] * l / (kLevels - 1);
            double const next = st.a * x + st.offset[k] + st.gain * src.sign * q;
            if (next < st.lower[k] - 1e-12 || next > st.upper[k] + 1e-12)
            {
                continue;
            }
            power[k] = q / src.cop[k];
            dfs(k + 1, next);
        }
    };
    dfs(0, st.initial);
    return out;
}

/// Smallest peak of `base + battery charging` over discretized charging
/// schedules meeting every energy target. Requires a lossless battery with
/// unit gain and equal charger levels at plugged-in steps.
inline double best_battery_peak(gridimpact::BatteryStore const& b, std::array<double, kSmallSteps> const& base)
{
    double const inf = std::numeric_limits<double>::infinity();
    double step_kw = 0.0;
    for (double c : b.charge_cap_kw)
    {
        step_kw = std::max(step_kw, c / (kLevels - 1));
    }
    int const max_units = static_cast<int>(kSmallSteps) * (kLevels - 1);
    std::vector<double> best(static_cast<std::size_t>(max_units + 1), inf), next;
    best[0] = 0.0;
    for (std::size_t k = 0; k < kSmallSteps; ++k)
    {
        next.assign(best.size(), inf);
        int const levels = b.charge_cap_kw[k] > 0 ? kLevels : 1;
        for (int n = 0; n <= max_units; ++n)
        {
            if (best[static_cast<std::size_t>(n)] == inf)
            {
                continue;
            }
            for (int l = 0; l < levels && n + l <= max_units; ++l)
            {
                double const p = step_kw * l;
                double const e = b.initial + b.efficiency * step_kw * (n + l) - b.drive_kw[k];
                if (e > b.capacity_kwh + 1e-12 || e < b.min_energy[k] - 1e-12)
                {
                    continue;
                }
                double const peak = std::max(best[static_cast<std::size_t>(n)], base[k] + p);
                auto& slot = next[static_cast<std::size_t>(n + l)];
                slot = std::min(slot, peak);
            }
        }
        best.swap(next);
    }
    return *std::min_element(best.begin(), best.end());
}

/// Exhaustive search over the 5-level discretization of every device.
inline double brute_force_peak(gridimpact::CoordinationProblem const& pb)
{
    auto const s1 = feasible_thermal_schedules(pb.thermal.at(0));
    auto const s2 = feasible_thermal_schedules(pb.thermal.at(1));
    double best = std::numeric_limits<double>::infinity();
    std::array<double, kSmallSteps> base{};
    for (auto const& a : s1)
    {
        for (auto const& b : s2)
        {
            double running = 0.0;
            for (std::size_t k = 0; k < kSmallSteps; ++k)
            {
                base[k] = pb.fixed_kw[k] + a[k] + b[k];
                running = std::max(running, base[k]);
            }
            if (running >= best)
            {
                continue;
            }
            best = std::min(best, best_battery_peak(pb.batteries.at(0), base));
        }
    }
    return best;
}

/// Largest electric step between adjacent levels, summed over devices.
inline double discretization_resolution(gridimpact::CoordinationProblem const& pb)
{
    double r = 0.0;
    for (auto const& st : pb.thermal)
    {
        double m = 0.0;
        for (std::size_t k = 0; k < pb.steps; ++k)
        {
            m = std::max(m, st.sources[0].cap_kw[k] / st.sources[0].cop[k] / (kLevels - 1));
        }
        r += m;
    }
    for (auto const& b : pb.batteries)
    {
        r += *std::max_element(b.charge_cap_kw.begin(), b.charge_cap_kw.end()) / (kLevels - 1);
    }
    return r;
}

} // namespace testing_support
