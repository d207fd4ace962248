#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gridimpact
{

using Timestamp = std::chrono::sys_time<std::chrono::minutes>;

/// Lumped single-zone thermal model of a dwelling.
///
/// Indoor air temperature follows the first-order RC law
///   C dT/dt = (theta - T)/R + q + w
/// where q is the thermal power from heating/cooling equipment and w the
/// exogenous gains (sun, plug loads, occupants).
struct BuildingEnvelope
{
    double resistance = 0.0;  ///< indoor-outdoor thermal resistance, degC/kW
    double capacitance = 0.0; ///< indoor thermal capacitance, kWh/degC

    void validate() const;
    double decay(double dt_hours) const;

    bool operator==(BuildingEnvelope const&) const = default;
};

/// Next indoor temperature after one step of length dt with constant inputs.
double step_building(
    BuildingEnvelope const& env,
    double indoor_c,
    double outdoor_c,
    double thermal_kw,
    double gain_kw,
    double dt_hours);

/// Thermal power that drives the indoor temperature exactly to `target_c`
/// at the end of the step. Negative values are cooling demand; no capacity
/// limits are applied here.
double ideal_thermal_power(
    BuildingEnvelope const& env,
    double indoor_c,
    double target_c,
    double outdoor_c,
    double gain_kw,
    double dt_hours);

/// Electric power of a heat pump with resistance backup serving a thermal
/// demand. The heat pump carries demand up to its capacity; the resistance
/// element (unit efficiency) covers the remainder up to its rating.
/// Passing `backup_kw = 0` gives the cooling-mode law.
double hvac_electric_power(
    double demand_kw,
    double hp_capacity_kw,
    double backup_kw,
    double cop);

struct Performance
{
    double capacity_kw = 0.0;
    double cop = 1.0;
};

struct CurveNode
{
    double outdoor_c = 0.0;
    double capacity_kw = 0.0;
    double cop = 1.0;

    bool operator==(CurveNode const&) const = default;
};

/// Piecewise-linear performance map over outdoor temperature, clamped at
/// the ends.
class PerformanceCurve
{
  public:
    PerformanceCurve() = default;
    explicit PerformanceCurve(std::vector<CurveNode> nodes);

    Performance at(double outdoor_c) const;
    std::span<CurveNode const> nodes() const { return nodes_; }
    bool empty() const { return nodes_.empty(); }

    /// Copy with every capacity multiplied by `factor`.
    PerformanceCurve scaled(double factor) const;
    /// Flat curve with the given capacity and COP at every temperature.
    static PerformanceCurve constant(double capacity_kw, double cop);

    bool operator==(PerformanceCurve const&) const = default;

  private:
    std::vector<CurveNode> nodes_;
};

/// Outdoor temperatures at which heating and cooling ratings are quoted.
inline constexpr double kHeatingRatingC = 8.33; // 47 F
inline constexpr double kCoolingRatingC = 35.0; // 95 F

/// Largest central unit on the market: five tons of cooling.
inline constexpr double kMaxCentralNameplateKw = 17.6;

struct HeatPumpUnit
{
    PerformanceCurve heating;
    PerformanceCurve cooling;
    double nameplate_cooling_kw = 0.0;

    void validate(bool central) const;
    bool operator==(HeatPumpUnit const&) const = default;
};

/// Capacity and COP of a unit in heating mode at the given outdoor temperature.
Performance hp_performance(HeatPumpUnit const& unit, double outdoor_c);
Performance hp_cooling_performance(HeatPumpUnit const& unit, double outdoor_c);

/// Central heat pump, optional mini-split, and resistance backup.
struct HeatPumpSystem
{
    HeatPumpUnit central;
    std::optional<HeatPumpUnit> minisplit;
    double backup_kw = 0.0;

    void validate() const;
    double heating_capacity(double outdoor_c) const; ///< thermal kW, heat pumps only
    double cooling_capacity(double outdoor_c) const;

    bool operator==(HeatPumpSystem const&) const = default;
};

struct HvacDispatch
{
    double thermal_kw = 0.0;  ///< signed: positive heats, negative cools
    double electric_kw = 0.0;
    double backup_electric_kw = 0.0;
};

/// Serve a heating demand with central unit first, then the mini-split, then
/// resistance backup. Reduces to `hvac_electric_power` without a mini-split.
HvacDispatch dispatch_heating(
    HeatPumpSystem const& sys,
    double demand_kw,
    double outdoor_c);

/// Serve a (positive) cooling demand, central unit first. No backup term.
HvacDispatch dispatch_cooling(
    HeatPumpSystem const& sys,
    double demand_kw,
    double outdoor_c);

/// Electric-vehicle battery.
struct EvBattery
{
    double capacity_kwh = 0.0;
    double charge_kw = 0.0;        ///< charger power cap
    double dissipation_per_h = 0.0;
    double efficiency = 1.0;       ///< charging efficiency in (0,1]

    void validate() const;
    bool operator==(EvBattery const&) const = default;
};

/// Below this dissipation rate the battery update uses the r -> 0 limit.
inline constexpr double kDissipationSeriesThreshold = 1e-6;

struct EvStep
{
    double energy_kwh = 0.0;
    bool depleted = false;   ///< the drive schedule asked for more than was stored
    bool saturated = false;  ///< clipped at capacity
};

EvStep step_ev(
    EvBattery const& batt,
    double energy_kwh,
    double charge_kw,
    double drive_kw,
    double dt_hours);

/// Unclipped battery update, the linear map used by the coordinator.
double ev_energy_update(
    EvBattery const& batt,
    double energy_kwh,
    double charge_kw,
    double drive_kw,
    double dt_hours);

/// Gain of the battery update with respect to net chemical power,
/// (1 - a)/r or dt in the limit.
double ev_input_gain(EvBattery const& batt, double dt_hours);

/// Charge-on-arrival policy: full charger power while plugged in and not
/// full, trimmed on the last step so the battery lands exactly at capacity.
double uncoordinated_ev_charge(
    EvBattery const& batt,
    double energy_kwh,
    bool plugged_in,
    double drive_kw,
    double dt_hours);

/// Storage water heater (resistance, heat pump, or hybrid).
struct WaterHeaterTank
{
    double capacitance = 0.0;    ///< kWh/degC
    double resistance = 0.0;     ///< degC/kW to surrounding air
    double ambient_c = 20.0;
    double cop = 1.0;            ///< 1 for resistance units
    double hp_electric_kw = 0.0; ///< 0 for resistance units
    double resistance_kw = 0.0;
    double setpoint_c = 50.0;

    void validate() const;
    double decay(double dt_hours) const;
    double max_thermal_kw() const { return cop * hp_electric_kw + resistance_kw; }

    bool operator==(WaterHeaterTank const&) const = default;
};

double step_water_heater(
    WaterHeaterTank const& tank,
    double water_c,
    double thermal_kw,
    double draw_kw,
    double dt_hours);

double ideal_tank_power(
    WaterHeaterTank const& tank,
    double water_c,
    double target_c,
    double draw_kw,
    double dt_hours);

/// Electric power for a tank thermal demand: heat pump first, then element.
double tank_electric_power(WaterHeaterTank const& tank, double demand_kw);

struct WeatherSeries
{
    std::vector<Timestamp> timestamps;
    std::vector<double> outdoor_c;
    double step_hours = 1.0;

    std::size_t size() const { return outdoor_c.size(); }
    void validate() const;
};

} // namespace gridimpact
