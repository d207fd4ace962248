#include "gridimpact/devices.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace gridimpact
{

namespace
{

void require_finite(std::initializer_list<double> values, char const* where)
{
    for (double v : values)
    {
        if (!std::isfinite(v))
        {
            throw std::invalid_argument(std::string(where) + ": non-finite input");
        }
    }
}

void require_positive_step(double dt_hours, char const* where)
{
    if (!(dt_hours > 0.0) || !std::isfinite(dt_hours))
    {
        throw std::invalid_argument(std::string(where) + ": time step must be positive");
    }
}

} // namespace

void BuildingEnvelope::validate() const
{
    if (!(resistance > 0.0) || !std::isfinite(resistance))
    {
        throw std::invalid_argument("building envelope: resistance must be positive");
    }
    if (!(capacitance > 0.0) || !std::isfinite(capacitance))
    {
        throw std::invalid_argument("building envelope: capacitance must be positive");
    }
}

double BuildingEnvelope::decay(double dt_hours) const
{
    return std::exp(-dt_hours / (resistance * capacitance));
}

double step_building(
    BuildingEnvelope const& env,
    double indoor_c,
    double outdoor_c,
    double thermal_kw,
    double gain_kw,
    double dt_hours)
{
    require_positive_step(dt_hours, "step_building");
    require_finite({indoor_c, outdoor_c, thermal_kw, gain_kw}, "step_building");
    double const a = env.decay(dt_hours);
    return a * indoor_c
        + (1.0 - a) * (outdoor_c + env.resistance * (thermal_kw + gain_kw));
}

double ideal_thermal_power(
    BuildingEnvelope const& env,
    double indoor_c,
    double target_c,
    double outdoor_c,
    double gain_kw,
    double dt_hours)
{
    require_positive_step(dt_hours, "ideal_thermal_power");
    require_finite({indoor_c, target_c, outdoor_c, gain_kw}, "ideal_thermal_power");
    double const a = env.decay(dt_hours);
    return ((target_c - a * indoor_c) / (1.0 - a) - outdoor_c) / env.resistance
        - gain_kw;
}

double hvac_electric_power(
    double demand_kw,
    double hp_capacity_kw,
    double backup_kw,
    double cop)
{
    if (demand_kw <= 0.0)
    {
        return 0.0;
    }
    if (demand_kw <= hp_capacity_kw)
    {
        return demand_kw / cop;
    }
    if (demand_kw <= hp_capacity_kw + backup_kw)
    {
        return hp_capacity_kw / cop + demand_kw - hp_capacity_kw;
    }
    return hp_capacity_kw / cop + backup_kw;
}

PerformanceCurve::PerformanceCurve(std::vector<CurveNode> nodes)
    : nodes_(std::move(nodes))
{
    if (nodes_.empty())
    {
        throw std::invalid_argument("performance curve: no nodes");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
    {
        auto const& n = nodes_[i];
        require_finite({n.outdoor_c, n.capacity_kw, n.cop}, "performance curve");
        if (i > 0 && !(n.outdoor_c > nodes_[i - 1].outdoor_c))
        {
            throw std::invalid_argument(
                "performance curve: temperatures must be strictly increasing (node "
                + std::to_string(i) + ")");
        }
        if (n.capacity_kw < 0.0)
        {
            throw std::invalid_argument(
                "performance curve: negative capacity at node " + std::to_string(i));
        }
        if (n.cop < 1.0)
        {
            throw std::invalid_argument(
                "performance curve: COP below 1 at node " + std::to_string(i));
        }
    }
}

Performance PerformanceCurve::at(double outdoor_c) const
{
    if (nodes_.empty())
    {
        throw std::logic_error("performance curve: evaluated while empty");
    }
    if (outdoor_c <= nodes_.front().outdoor_c)
    {
        return {nodes_.front().capacity_kw, nodes_.front().cop};
    }
    if (outdoor_c >= nodes_.back().outdoor_c)
    {
        return {nodes_.back().capacity_kw, nodes_.back().cop};
    }
    auto hi = std::upper_bound(
        nodes_.begin(), nodes_.end(), outdoor_c,
        [](double t, CurveNode const& n) { return t < n.outdoor_c; });
    auto lo = std::prev(hi);
    double const f = (outdoor_c - lo->outdoor_c) / (hi->outdoor_c - lo->outdoor_c);
    return {
        lo->capacity_kw + f * (hi->capacity_kw - lo->capacity_kw),
        lo->cop + f * (hi->cop - lo->cop)};
}

PerformanceCurve PerformanceCurve::scaled(double factor) const
{
    if (!(factor >= 0.0))
    {
        throw std::invalid_argument("performance curve: negative scale factor");
    }
    auto copy = nodes_;
    for (auto& n : copy)
    {
        n.capacity_kw *= factor;
    }
    return PerformanceCurve(std::move(copy));
}

PerformanceCurve PerformanceCurve::constant(double capacity_kw, double cop)
{
    return PerformanceCurve({{0.0, capacity_kw, cop}});
}

void HeatPumpUnit::validate(bool central) const
{
    if (heating.empty() || cooling.empty())
    {
        throw std::invalid_argument("heat pump: missing performance curve");
    }
    if (nameplate_cooling_kw < 0.0)
    {
        throw std::invalid_argument("heat pump: negative nameplate");
    }
    if (central && nameplate_cooling_kw > kMaxCentralNameplateKw + 1e-9)
    {
        throw std::invalid_argument("heat pump: central nameplate exceeds five tons");
    }
}

Performance hp_performance(HeatPumpUnit const& unit, double outdoor_c)
{
    return unit.heating.at(outdoor_c);
}

Performance hp_cooling_performance(HeatPumpUnit const& unit, double outdoor_c)
{
    return unit.cooling.at(outdoor_c);
}

void HeatPumpSystem::validate() const
{
    central.validate(true);
    if (minisplit)
    {
        minisplit->validate(false);
    }
    if (backup_kw < 0.0)
    {
        throw std::invalid_argument("heat pump system: negative backup rating");
    }
}

double HeatPumpSystem::heating_capacity(double outdoor_c) const
{
    double cap = hp_performance(central, outdoor_c).capacity_kw;
    if (minisplit)
    {
        cap += hp_performance(*minisplit, outdoor_c).capacity_kw;
    }
    return cap;
}

double HeatPumpSystem::cooling_capacity(double outdoor_c) const
{
    double cap = hp_cooling_performance(central, outdoor_c).capacity_kw;
    if (minisplit)
    {
        cap += hp_cooling_performance(*minisplit, outdoor_c).capacity_kw;
    }
    return cap;
}

HvacDispatch dispatch_heating(
    HeatPumpSystem const& sys,
    double demand_kw,
    double outdoor_c)
{
    HvacDispatch out;
    if (demand_kw <= 0.0)
    {
        return out;
    }
    auto const c = hp_performance(sys.central, outdoor_c);
    double const from_central = std::min(demand_kw, c.capacity_kw);
    double rest = demand_kw - from_central;
    out.thermal_kw = from_central;
    out.electric_kw = from_central / c.cop;
    if (sys.minisplit && rest > 0.0)
    {
        auto const m = hp_performance(*sys.minisplit, outdoor_c);
        double const from_mini = std::min(rest, m.capacity_kw);
        rest -= from_mini;
        out.thermal_kw += from_mini;
        out.electric_kw += from_mini / m.cop;
    }
    double const from_backup = std::min(rest, sys.backup_kw);
    out.thermal_kw += from_backup;
    out.electric_kw += from_backup;
    out.backup_electric_kw = from_backup;
    return out;
}

HvacDispatch dispatch_cooling(
    HeatPumpSystem const& sys,
    double demand_kw,
    double outdoor_c)
{
    HvacDispatch out;
    if (demand_kw <= 0.0)
    {
        return out;
    }
    auto const c = hp_cooling_performance(sys.central, outdoor_c);
    double const from_central = std::min(demand_kw, c.capacity_kw);
    double rest = demand_kw - from_central;
    double removed = from_central;
    out.electric_kw = from_central / c.cop;
    if (sys.minisplit && rest > 0.0)
    {
        auto const m = hp_cooling_performance(*sys.minisplit, outdoor_c);
        double const from_mini = std::min(rest, m.capacity_kw);
        removed += from_mini;
        out.electric_kw += from_mini / m.cop;
    }
    out.thermal_kw = -removed;
    return out;
}

void EvBattery::validate() const
{
    if (!(capacity_kwh > 0.0))
    {
        throw std::invalid_argument("EV battery: capacity must be positive");
    }
    if (charge_kw < 0.0 || dissipation_per_h < 0.0)
    {
        throw std::invalid_argument("EV battery: negative charger power or dissipation");
    }
    if (!(efficiency > 0.0 && efficiency <= 1.0))
    {
        throw std::invalid_argument("EV battery: efficiency must lie in (0, 1]");
    }
}

double ev_input_gain(EvBattery const& batt, double dt_hours)
{
    double const r = batt.dissipation_per_h;
    if (r < kDissipationSeriesThreshold)
    {
        return dt_hours;
    }
    return -std::expm1(-r * dt_hours) / r;
}

double ev_energy_update(
    EvBattery const& batt,
    double energy_kwh,
    double charge_kw,
    double drive_kw,
    double dt_hours)
{
    require_positive_step(dt_hours, "step_ev");
    require_finite({energy_kwh, charge_kw, drive_kw}, "step_ev");
    double const r = batt.dissipation_per_h;
    double const net = batt.efficiency * charge_kw - drive_kw;
    if (r < kDissipationSeriesThreshold)
    {
        return energy_kwh + dt_hours * net;
    }
    return std::exp(-r * dt_hours) * energy_kwh + ev_input_gain(batt, dt_hours) * net;
}

EvStep step_ev(
    EvBattery const& batt,
    double energy_kwh,
    double charge_kw,
    double drive_kw,
    double dt_hours)
{
    double const e = ev_energy_update(batt, energy_kwh, charge_kw, drive_kw, dt_hours);
    EvStep out;
    out.energy_kwh = std::clamp(e, 0.0, batt.capacity_kwh);
    out.depleted = e < 0.0;
    out.saturated = e > batt.capacity_kwh;
    return out;
}

double uncoordinated_ev_charge(
    EvBattery const& batt,
    double energy_kwh,
    bool plugged_in,
    double drive_kw,
    double dt_hours)
{
    if (!plugged_in || energy_kwh >= batt.capacity_kwh)
    {
        return 0.0;
    }
    double const a = batt.dissipation_per_h < kDissipationSeriesThreshold
        ? 1.0
        : std::exp(-batt.dissipation_per_h * dt_hours);
    double const fill =
        ((batt.capacity_kwh - a * energy_kwh) / ev_input_gain(batt, dt_hours) + drive_kw)
        / batt.efficiency;
    return std::clamp(fill, 0.0, batt.charge_kw);
}

void WaterHeaterTank::validate() const
{
    if (!(capacitance > 0.0) || !(resistance > 0.0))
    {
        throw std::invalid_argument("water heater: capacitance and resistance must be positive");
    }
    if (cop < 1.0)
    {
        throw std::invalid_argument("water heater: COP below 1");
    }
    if (hp_electric_kw < 0.0 || resistance_kw < 0.0)
    {
        throw std::invalid_argument("water heater: negative power rating");
    }
}

double WaterHeaterTank::decay(double dt_hours) const
{
    return std::exp(-dt_hours / (resistance * capacitance));
}

double step_water_heater(
    WaterHeaterTank const& tank,
    double water_c,
    double thermal_kw,
    double draw_kw,
    double dt_hours)
{
    require_positive_step(dt_hours, "step_water_heater");
    require_finite({water_c, thermal_kw, draw_kw}, "step_water_heater");
    double const a = tank.decay(dt_hours);
    return a * water_c
        + (1.0 - a) * (tank.ambient_c + tank.resistance * (thermal_kw - draw_kw));
}

double ideal_tank_power(
    WaterHeaterTank const& tank,
    double water_c,
    double target_c,
    double draw_kw,
    double dt_hours)
{
    require_positive_step(dt_hours, "ideal_tank_power");
    double const a = tank.decay(dt_hours);
    return ((target_c - a * water_c) / (1.0 - a) - tank.ambient_c) / tank.resistance
        + draw_kw;
}

double tank_electric_power(WaterHeaterTank const& tank, double demand_kw)
{
    return hvac_electric_power(
        demand_kw, tank.cop * tank.hp_electric_kw, tank.resistance_kw, tank.cop);
}

void WeatherSeries::validate() const
{
    if (outdoor_c.empty())
    {
        throw std::invalid_argument("weather: empty series");
    }
    if (timestamps.size() != outdoor_c.size())
    {
        throw std::invalid_argument("weather: timestamp and temperature counts differ");
    }
    if (!(step_hours > 0.0))
    {
        throw std::invalid_argument("weather: step must be positive");
    }
    auto const step = std::chrono::minutes(std::lround(step_hours * 60.0));
    for (std::size_t i = 0; i < outdoor_c.size(); ++i)
    {
        if (!std::isfinite(outdoor_c[i]))
        {
            throw std::invalid_argument("weather: non-finite temperature at row " + std::to_string(i));
        }
        if (i > 0 && timestamps[i] - timestamps[i - 1] != step)
        {
            throw std::invalid_argument("weather: non-uniform spacing at row " + std::to_string(i));
        }
    }
}

} // namespace gridimpact
