#include "gridimpact/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace gridimpact
{

namespace
{

constexpr std::size_t kBlockSize = 32;
constexpr double kComfortTolerance = 0.5;

std::size_t steps_for(double hours, double step_hours)
{
    return static_cast<std::size_t>(std::llround(hours / step_hours));
}

WeekWindow window_around(std::size_t extreme, std::size_t n, double step_hours)
{
    auto const warm = static_cast<std::ptrdiff_t>(steps_for(kWarmupHours, step_hours));
    auto const week = static_cast<std::ptrdiff_t>(steps_for(kWeekHours, step_hours));
    auto const half = static_cast<std::ptrdiff_t>(steps_for(kWeekHours / 2.0, step_hours));
    auto const last = static_cast<std::ptrdiff_t>(n) - week;
    auto const x = static_cast<std::ptrdiff_t>(extreme);
    // An extreme inside the first day shortens the warm-up instead.
    std::ptrdiff_t const begin = std::min(std::clamp(x - half, warm, last), x);
    WeekWindow w;
    w.scored_begin = static_cast<std::size_t>(begin);
    w.scored_end = static_cast<std::size_t>(begin + week);
    w.warmup_begin = static_cast<std::size_t>(begin - std::min(warm, begin));
    return w;
}

double solar_shape(double hour_of_day)
{
    if (hour_of_day <= 6.0 || hour_of_day >= 18.0)
    {
        return 0.0;
    }
    return std::sin(std::numbers::pi * (hour_of_day - 6.0) / 12.0);
}

struct Interval
{
    double begin = 0.0;
    double end = 0.0;
};

double overlap(Interval const& a, double lo, double hi)
{
    return std::max(0.0, std::min(a.end, hi) - std::max(a.begin, lo));
}

// Partial sums of one block of households over the scored steps.
struct BlockSum
{
    std::vector<double> misc, water, ev, hvac;
    SimDiagnostics diag;

    explicit BlockSum(std::size_t n) : misc(n, 0.0), water(n, 0.0), ev(n, 0.0), hvac(n, 0.0) {}

    void add(HouseholdTrace const& t, std::size_t offset)
    {
        for (std::size_t k = 0; k < misc.size(); ++k)
        {
            misc[k] += t.misc_kw[offset + k];
            water[k] += t.water_kw[offset + k];
            ev[k] += t.ev_kw[offset + k];
            hvac[k] += t.hvac_kw[offset + k];
        }
        diag.backup_kwh += t.backup_kwh;
        diag.depleted_steps += t.depleted_steps;
        diag.depleted_households += t.depleted_steps > 0 ? 1 : 0;
        diag.comfort_violation_households += t.comfort_violation_steps > 0 ? 1 : 0;
    }
};

AggregateProfile reduce_blocks(std::vector<BlockSum> const& blocks, SimWindow const& w, double scale)
{
    AggregateProfile out;
    std::size_t const n = w.scored_steps();
    out.timestamps.assign(w.timestamps.begin() + static_cast<std::ptrdiff_t>(w.warmup_steps), w.timestamps.end());
    out.misc_kw.assign(n, 0.0);
    out.water_kw.assign(n, 0.0);
    out.ev_kw.assign(n, 0.0);
    out.hvac_kw.assign(n, 0.0);
    for (auto const& b : blocks)
    {
        for (std::size_t k = 0; k < n; ++k)
        {
            out.misc_kw[k] += b.misc[k];
            out.water_kw[k] += b.water[k];
            out.ev_kw[k] += b.ev[k];
            out.hvac_kw[k] += b.hvac[k];
        }
        out.diagnostics.backup_kwh += b.diag.backup_kwh;
        out.diagnostics.depleted_steps += b.diag.depleted_steps;
        out.diagnostics.depleted_households += b.diag.depleted_households;
        out.diagnostics.comfort_violation_households += b.diag.comfort_violation_households;
    }
    out.total_kw.resize(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        out.misc_kw[k] *= scale;
        out.water_kw[k] *= scale;
        out.ev_kw[k] *= scale;
        out.hvac_kw[k] *= scale;
        out.total_kw[k] = out.misc_kw[k] + out.water_kw[k] + out.ev_kw[k] + out.hvac_kw[k];
    }
    out.diagnostics.backup_kwh *= scale;
    return out;
}

template <class F>
void parallel_for(std::size_t count, unsigned jobs, F&& f)
{
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (jobs <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            f(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (unsigned j = 0; j < jobs; ++j)
    {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++)
            {
                try
                {
                    f(i);
                }
                catch (...)
                {
                    if (!failed.exchange(true))
                    {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool)
    {
        t.join();
    }
    if (error)
    {
        std::rethrow_exception(error);
    }
}

} // namespace

PeakWeeks select_peak_weeks(WeatherSeries const& weather)
{
    weather.validate();
    std::size_t const n = weather.size();
    if (n < steps_for(kWarmupHours + kWeekHours, weather.step_hours))
    {
        throw std::invalid_argument("select_peak_weeks: weather series shorter than 8 days");
    }
    auto const& t = weather.outdoor_c;
    auto const lo = static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin());
    auto const hi = static_cast<std::size_t>(std::max_element(t.begin(), t.end()) - t.begin());
    return {window_around(lo, n, weather.step_hours), window_around(hi, n, weather.step_hours)};
}

SimWindow make_window(WeatherSeries const& weather, WeekWindow const& week, double dt_hours)
{
    if (!(dt_hours > 0.0) || !std::isfinite(dt_hours))
    {
        throw std::invalid_argument("make_window: dt must be positive");
    }
    double const dt_min = dt_hours * 60.0;
    if (std::abs(dt_min - std::round(dt_min)) > 1e-9)
    {
        throw std::invalid_argument("make_window: dt must be a whole number of minutes");
    }
    if (!(week.warmup_begin <= week.scored_begin && week.scored_begin < week.scored_end &&
          week.scored_end <= weather.size()))
    {
        throw std::invalid_argument("make_window: window outside the weather series");
    }

    SimWindow w;
    w.dt_hours = dt_hours;
    double const sh = weather.step_hours;
    double const total_h = static_cast<double>(week.scored_end - week.warmup_begin) * sh;
    double const warm_h = static_cast<double>(week.scored_begin - week.warmup_begin) * sh;
    std::size_t const n = steps_for(total_h, dt_hours);
    w.warmup_steps = steps_for(warm_h, dt_hours);

    Timestamp const t0 = weather.timestamps[week.warmup_begin];
    auto const step = std::chrono::minutes(std::lround(dt_min));
    w.timestamps.reserve(n);
    w.outdoor_c.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        Timestamp const ts = t0 + step * static_cast<long>(k);
        double const x = static_cast<double>(week.warmup_begin) + static_cast<double>(k) * dt_hours / sh;
        auto const i = std::min(static_cast<std::size_t>(x), weather.size() - 1);
        auto const j = std::min(i + 1, weather.size() - 1);
        double const f = x - static_cast<double>(i);
        double const theta = weather.outdoor_c[i] + f * (weather.outdoor_c[j] - weather.outdoor_c[i]);

        auto const day = std::chrono::floor<std::chrono::days>(ts);
        double const hour = static_cast<double>((ts - day).count()) / 60.0;
        std::chrono::weekday const wd{day};

        w.timestamps.push_back(ts);
        w.outdoor_c.push_back(theta);
        w.hour_of_day.push_back(hour);
        w.weekend.push_back(wd == std::chrono::Saturday || wd == std::chrono::Sunday);
    }
    return w;
}

VehicleSchedule vehicle_schedule(Vehicle const& v, TemperatureCurve const& multiplier, SimWindow const& w)
{
    VehicleSchedule s;
    std::size_t const n = w.steps();
    s.plugged_in.assign(n, true);
    s.drive_kw.assign(n, 0.0);
    if (n == 0)
    {
        return s;
    }

    // Hours measured from midnight of the first day.
    auto const base = std::chrono::floor<std::chrono::days>(w.timestamps.front());
    double const start_h = static_cast<double>((w.timestamps.front() - base).count()) / 60.0;
    double const end_h = start_h + static_cast<double>(n) * w.dt_hours;
    auto const days = static_cast<int>(std::ceil(end_h / 24.0)) + 1;

    TripPattern const& tp = v.trips;
    std::vector<Interval> driving;
    std::vector<Interval> away;
    for (int d = -1; d < days; ++d)
    {
        double const day0 = 24.0 * d;
        std::chrono::weekday const wd{base + std::chrono::days(d)};
        bool const weekend = wd == std::chrono::Saturday || wd == std::chrono::Sunday;
        if (!weekend)
        {
            double const tau = tp.commute_km / tp.speed_kmh;
            double const out = day0 + tp.depart_hour;
            double const back = out + tau + tp.work_hours;
            driving.push_back({out, out + tau});
            driving.push_back({back, back + tau});
            away.push_back({out, back + tau});
        }
        else if (tp.weekend_km > 0.0)
        {
            double const tau = 0.5 * tp.weekend_km / tp.speed_kmh;
            double const out = day0 + tp.weekend_depart_hour;
            double const stay = std::max(tp.weekend_hours, 2.0 * tau);
            driving.push_back({out, out + tau});
            driving.push_back({out + stay - tau, out + stay});
            away.push_back({out, out + stay});
        }
    }

    for (std::size_t k = 0; k < n; ++k)
    {
        double const lo = start_h + static_cast<double>(k) * w.dt_hours;
        double const hi = lo + w.dt_hours;
        double drive_h = 0.0;
        for (auto const& iv : driving)
        {
            drive_h += overlap(iv, lo, hi);
        }
        bool home = true;
        for (auto const& iv : away)
        {
            if (overlap(iv, lo, hi) > 0.0)
            {
                home = false;
                break;
            }
        }
        double const kw_driving = v.kwh_per_km * multiplier.at(w.outdoor_c[k]) * tp.speed_kmh;
        s.drive_kw[k] = kw_driving * drive_h / w.dt_hours;
        s.plugged_in[k] = home;
        if (k > 0 && s.plugged_in[k - 1] && !home)
        {
            s.departures.push_back(k);
        }
    }
    return s;
}

HouseholdInputs household_inputs(Fleet const& fleet, Household const& h, SimWindow const& w)
{
    HouseholdInputs in;
    std::size_t const n = w.steps();
    in.misc_kw.resize(n);
    in.gain_kw.resize(n);
    in.draw_kw.resize(n);
    in.heat_setpoint_c.resize(n);
    in.cool_setpoint_c.resize(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        double const hour = w.hour_of_day[k];
        double const misc = h.loads.misc_scale * fleet.misc_load.at_hour(hour + h.loads.misc_shift_h);
        in.misc_kw[k] = misc;
        in.gain_kw[k] = misc + h.loads.occupant_kw + h.loads.solar_peak_kw * solar_shape(hour);
        in.draw_kw[k] = h.loads.draw_scale * fleet.hot_water_draw.at_hour(hour + h.loads.draw_shift_h);
        in.heat_setpoint_c[k] = h.thermostat.heat_at(hour);
        in.cool_setpoint_c[k] = h.thermostat.cool_setpoint_c;
    }
    for (std::size_t i = 0; i < h.vehicles.size(); ++i)
    {
        if (h.vehicle_is_electric(i))
        {
            in.electric_vehicles.push_back(i);
            in.vehicles.push_back(vehicle_schedule(h.vehicles[i], fleet.ev_consumption_multiplier, w));
        }
    }
    return in;
}

HouseholdTrace simulate_household(Fleet const& fleet, Household const& h, SimWindow const& w)
{
    HouseholdInputs const in = household_inputs(fleet, h, w);
    Appliances const& app = h.appliances();
    std::size_t const n = w.steps();
    double const dt = w.dt_hours;

    HouseholdTrace tr;
    tr.misc_kw = in.misc_kw;
    tr.water_kw.assign(n, 0.0);
    tr.ev_kw.assign(n, 0.0);
    tr.hvac_kw.assign(n, 0.0);
    tr.hvac_thermal_kw.assign(n, 0.0);
    tr.indoor_c.resize(n);
    if (app.water.electric)
    {
        tr.tank_c.resize(n);
    }
    tr.ev_energy_kwh.assign(in.vehicles.size(), std::vector<double>(n));

    double indoor = n > 0 && w.outdoor_c[0] > in.cool_setpoint_c[0] ? in.cool_setpoint_c[0]
                    : n > 0                                         ? in.heat_setpoint_c[0]
                                                                    : 0.0;
    double tank_c = app.water.tank.setpoint_c;
    std::vector<double> energy;
    for (std::size_t i : in.electric_vehicles)
    {
        energy.push_back(h.vehicles[i].battery.capacity_kwh);
    }

    for (std::size_t k = 0; k < n; ++k)
    {
        bool const scored = k >= w.warmup_steps;
        double const theta = w.outdoor_c[k];
        double const gain = in.gain_kw[k];

        HvacDispatch d;
        double const q_heat = ideal_thermal_power(h.envelope, indoor, in.heat_setpoint_c[k], theta, gain, dt);
        if (q_heat > 0.0)
        {
            switch (app.hvac.heating)
            {
            case HeatingSource::HeatPump:
                d = dispatch_heating(app.hvac.unit, q_heat, theta);
                break;
            case HeatingSource::Resistance:
                d.thermal_kw = std::min(q_heat, app.hvac.heater_kw);
                d.electric_kw = d.thermal_kw;
                break;
            case HeatingSource::Fossil:
                d.thermal_kw = std::min(q_heat, app.hvac.heater_kw);
                break;
            case HeatingSource::None:
                break;
            }
        }
        else if (app.hvac.has_cooling)
        {
            double const q_cool =
                ideal_thermal_power(h.envelope, indoor, in.cool_setpoint_c[k], theta, gain, dt);
            if (q_cool < 0.0)
            {
                d = dispatch_cooling(app.hvac.unit, -q_cool, theta);
            }
        }
        indoor = step_building(h.envelope, indoor, theta, d.thermal_kw, gain, dt);
        tr.indoor_c[k] = indoor;
        tr.hvac_kw[k] = d.electric_kw;
        tr.hvac_thermal_kw[k] = d.thermal_kw;
        if (scored)
        {
            tr.backup_kwh += d.backup_electric_kw * dt;
            bool const cold = indoor < in.heat_setpoint_c[k] - kComfortTolerance;
            bool const hot = app.hvac.has_cooling && indoor > in.cool_setpoint_c[k] + kComfortTolerance;
            tr.comfort_violation_steps += cold || hot ? 1 : 0;
        }

        if (app.water.electric)
        {
            auto const& tank = app.water.tank;
            double const q = std::clamp(
                ideal_tank_power(tank, tank_c, tank.setpoint_c, in.draw_kw[k], dt), 0.0, tank.max_thermal_kw());
            tr.water_kw[k] = tank_electric_power(tank, q);
            tank_c = step_water_heater(tank, tank_c, q, in.draw_kw[k], dt);
            tr.tank_c[k] = tank_c;
        }

        for (std::size_t v = 0; v < in.vehicles.size(); ++v)
        {
            auto const& batt = h.vehicles[in.electric_vehicles[v]].battery;
            auto const& sched = in.vehicles[v];
            double const p =
                uncoordinated_ev_charge(batt, energy[v], sched.plugged_in[k], sched.drive_kw[k], dt);
            EvStep const st = step_ev(batt, energy[v], p, sched.drive_kw[k], dt);
            energy[v] = st.energy_kwh;
            tr.ev_energy_kwh[v][k] = st.energy_kwh;
            tr.ev_kw[k] += p;
            if (scored && st.depleted)
            {
                ++tr.depleted_steps;
            }
        }
    }
    return tr;
}

std::size_t AggregateProfile::peak_index() const
{
    return static_cast<std::size_t>(std::max_element(total_kw.begin(), total_kw.end()) - total_kw.begin());
}

AggregateProfile simulate_week(Fleet const& fleet, SimWindow const& w, SimulationOptions const& options)
{
    std::size_t const n = fleet.households.size();
    std::size_t const blocks = (n + kBlockSize - 1) / kBlockSize;
    std::vector<BlockSum> partial(blocks, BlockSum(w.scored_steps()));
    parallel_for(blocks, options.jobs, [&](std::size_t b) {
        std::size_t const end = std::min(n, (b + 1) * kBlockSize);
        for (std::size_t i = b * kBlockSize; i < end; ++i)
        {
            partial[b].add(simulate_household(fleet, fleet.households[i], w), w.warmup_steps);
        }
    });
    return reduce_blocks(partial, w, fleet.scale_factor);
}

AggregateProfile aggregate(std::span<HouseholdTrace const> traces, SimWindow const& w, double scale_factor)
{
    std::size_t const blocks = (traces.size() + kBlockSize - 1) / kBlockSize;
    std::vector<BlockSum> partial(blocks, BlockSum(w.scored_steps()));
    for (std::size_t i = 0; i < traces.size(); ++i)
    {
        partial[i / kBlockSize].add(traces[i], w.warmup_steps);
    }
    return reduce_blocks(partial, w, scale_factor);
}

double peak99(std::span<double const> values)
{
    if (values.empty())
    {
        throw std::invalid_argument("peak99: empty series");
    }
    std::vector<double> v(values.begin(), values.end());
    auto const rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(v.size())));
    auto const idx = std::max<std::size_t>(rank, 1) - 1;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
    return v[idx];
}

ReinforcementRequirement reinforcement_requirement(
    std::string county_id,
    GridCapacityEstimate const& bau,
    GridCapacityEstimate const& future)
{
    return {std::move(county_id), std::max(0.0, future.capacity_kw() - bau.capacity_kw())};
}

double bau_headroom(CountySpec const& spec)
{
    auto const [lo, hi] = spec.bau_headroom_range;
    if (hi <= lo)
    {
        return lo;
    }
    std::mt19937_64 rng(county_seed(0, spec.county_id));
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

CountyPeak simulate_county(
    Fleet const& fleet,
    SimWindow const& heating,
    SimWindow const& cooling,
    SimulationOptions const& options)
{
    CountyPeak out;
    out.heating = simulate_week(fleet, heating, options);
    out.cooling = simulate_week(fleet, cooling, options);
    out.peak99_kw = std::max(peak99(out.heating.total_kw), peak99(out.cooling.total_kw));
    return out;
}

MonteCarloResult summarize_peaks(std::vector<double> peaks, std::size_t bins)
{
    MonteCarloResult r;
    r.peaks_kw = std::move(peaks);
    auto const& p = r.peaks_kw;
    if (p.size() < 2)
    {
        throw std::invalid_argument("monte carlo: need at least two runs");
    }
    double const n = static_cast<double>(p.size());
    double sum = 0.0;
    for (double x : p)
    {
        sum += x;
    }
    r.mean = sum / n;
    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : p)
    {
        double const d = x - r.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    r.std = std::sqrt(m2 / (n - 1.0));
    r.skewness = m2 > 0.0 ? (m3 / n) / std::pow(m2 / n, 1.5) : 0.0;

    bins = std::max<std::size_t>(bins, 1);
    auto const [mn, mx] = std::minmax_element(p.begin(), p.end());
    double const lo = *mn;
    double const width = (*mx - lo) / static_cast<double>(bins);
    r.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
    {
        r.bin_edges[b] = lo + width * static_cast<double>(b);
    }
    r.bin_edges.back() = *mx;
    r.counts.assign(bins, 0);
    for (double x : p)
    {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((x - lo) / width) : 0;
        r.counts[std::min(b, bins - 1)]++;
    }
    return r;
}

MonteCarloResult monte_carlo_peaks(
    CountySpec const& spec,
    Scenario scenario,
    SimWindow const& heating,
    SimWindow const& cooling,
    std::span<std::uint64_t const> seeds,
    SynthesisOptions const& synthesis,
    SimulationOptions const& options)
{
    std::vector<double> peaks;
    peaks.reserve(seeds.size());
    for (std::uint64_t s : seeds)
    {
        Fleet const fleet = synthesize_fleet(spec, scenario, s, synthesis);
        peaks.push_back(simulate_county(fleet, heating, cooling, options).peak99_kw);
    }
    return summarize_peaks(std::move(peaks));
}

std::vector<std::uint64_t> run_seeds(std::uint64_t master_seed, std::size_t runs)
{
    std::vector<std::uint64_t> out(runs);
    for (std::size_t r = 0; r < runs; ++r)
    {
        out[r] = mix_seed(master_seed, r);
    }
    return out;
}

} // namespace gridimpact
