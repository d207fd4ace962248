#pragma once

#include "gridimpact/devices.hpp"
#include "gridimpact/sizing.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gridimpact
{

/// Scalar function of outdoor temperature, linear between nodes and clamped.
class TemperatureCurve
{
  public:
    TemperatureCurve() = default;
    TemperatureCurve(std::vector<std::pair<double, double>> nodes);

    double at(double outdoor_c) const;
    bool empty() const { return nodes_.empty(); }

    bool operator==(TemperatureCurve const&) const = default;

  private:
    std::vector<std::pair<double, double>> nodes_;
};

/// Periodic 24 h load shape, linear between samples.
class DailyProfile
{
  public:
    DailyProfile() = default;
    DailyProfile(std::vector<double> samples_kw);

    double at_hour(double hour_of_day) const;
    double mean() const;
    double peak() const;
    bool empty() const { return samples_.empty(); }

    bool operator==(DailyProfile const&) const = default;

  private:
    std::vector<double> samples_;
};

struct HousingArchetype
{
    std::string type;
    double weight = 0.0;
    double floor_area_m2 = 0.0;
    double resistance = 0.0;  ///< degC/kW
    double capacitance = 0.0; ///< kWh/degC
};

struct CountProbability
{
    int count = 0;
    double probability = 0.0;
};

struct NormalParams
{
    double mean = 0.0;
    double sd = 0.0;
};

/// Shares of today's equipment. Heating not covered by resistance or heat
/// pumps is fossil-fired and draws no electricity.
struct BauShares
{
    double resistance_heating = 0.0;
    double heat_pump_heating = 0.0;
    double air_conditioning = 0.0;
    double electric_water_heating = 0.0;
    double electric_vehicles = 0.0;
};

struct VehicleClass
{
    double battery_kwh = 0.0;
    double kwh_per_km = 0.0;
    double charger_kw = 0.0;
};

/// Equipment data shared by counties.
struct EquipmentData
{
    ReferenceUnit heat_pump_today;
    ReferenceUnit heat_pump_cold_climate;
    TemperatureCurve ev_consumption_multiplier;
    VehicleClass small_vehicle{75.0, 0.18, 7.2};
    VehicleClass large_vehicle{98.0, 0.30, 9.6};
    double ev_charge_efficiency = 0.9;
    double ev_dissipation_per_h = 2e-4;
};

struct CountySpec
{
    std::string county_id;
    std::string climate_zone; ///< IECC tag, e.g. "6A"
    std::int64_t true_household_count = 1;
    DesignConditions design;

    std::vector<HousingArchetype> housing_mix;
    double envelope_sigma = 0.15; ///< lognormal spread of R and C within an archetype

    std::vector<CountProbability> vehicles_per_household;
    double large_vehicle_fraction = 0.5;
    double commute_km_median = 20.0;
    double commute_km_sigma = 0.6;

    std::pair<double, double> bau_headroom_range{0.15, 0.36};
    BauShares bau;
    double heat_pump_water_heater_fraction = 0.0; ///< all-electric scenario

    NormalParams heat_setpoint{20.5, 1.0};
    NormalParams cool_setpoint{24.0, 1.0};

    DailyProfile misc_load;       ///< kW, mean household
    DailyProfile hot_water_draw;  ///< thermal kW, mean household
    double load_scale_sigma = 0.35;

    EquipmentData equipment;
    std::filesystem::path weather_ref;

    /// IECC zone number parsed from the tag (0 when absent).
    int climate_zone_number() const;
    void validate() const;
};

enum class Scenario
{
    Bau,
    AllElectric,
};

std::string_view to_string(Scenario s);

enum class HeatPumpProfile
{
    ColdClimate, ///< cold-climate units in IECC zones 6 and 7, today's elsewhere
    Today,       ///< today's units everywhere
};

enum class HeatingSource
{
    None,
    Fossil,
    Resistance,
    HeatPump,
};

struct HvacEquipment
{
    HeatingSource heating = HeatingSource::None;
    double heater_kw = 0.0; ///< fossil or resistance thermal rating
    bool has_cooling = false;
    /// Heat pump (heating and cooling) or central air conditioner.
    HeatPumpSystem unit;

    bool operator==(HvacEquipment const&) const = default;
};

struct WaterHeating
{
    bool electric = false;
    WaterHeaterTank tank;

    bool operator==(WaterHeating const&) const = default;
};

struct Appliances
{
    HvacEquipment hvac;
    WaterHeating water;

    bool operator==(Appliances const&) const = default;
};

struct TripPattern
{
    double commute_km = 0.0;    ///< one way
    double depart_hour = 7.5;   ///< weekday morning departure
    double work_hours = 8.5;
    double speed_kmh = 40.0;
    double weekend_depart_hour = 11.0;
    double weekend_hours = 3.0; ///< time away, driving included
    double weekend_km = 0.0;    ///< round trip

    bool operator==(TripPattern const&) const = default;
};

struct Vehicle
{
    bool large = false;
    bool electric_today = false;
    EvBattery battery;
    double kwh_per_km = 0.0;
    TripPattern trips;

    bool operator==(Vehicle const&) const = default;
};

struct Setback
{
    double start_hour = 22.0;
    double duration_hours = 8.0;
    double depth_c = 2.0;

    bool operator==(Setback const&) const = default;
};

struct Thermostat
{
    double heat_setpoint_c = 20.0;
    double cool_setpoint_c = 24.0;
    std::optional<Setback> setback;

    /// Heating setpoint at an hour of the day, setback applied.
    double heat_at(double hour_of_day) const;

    bool operator==(Thermostat const&) const = default;
};

struct LoadShape
{
    double misc_scale = 1.0;
    double misc_shift_h = 0.0;
    double draw_scale = 1.0;
    double draw_shift_h = 0.0;
    double solar_peak_kw = 0.5;
    double occupant_kw = 0.25;

    bool operator==(LoadShape const&) const = default;
};

struct Household
{
    std::string archetype;
    double floor_area_m2 = 0.0;
    BuildingEnvelope envelope;
    Thermostat thermostat;
    LoadShape loads;
    Appliances today;
    Appliances electrified_set;
    std::vector<Vehicle> vehicles;
    bool electrified = false;

    Appliances const& appliances() const { return electrified ? electrified_set : today; }
    bool vehicle_is_electric(std::size_t i) const
    {
        return electrified || vehicles[i].electric_today;
    }

    bool operator==(Household const&) const = default;
};

struct Fleet
{
    std::string county_id;
    std::vector<Household> households;
    double scale_factor = 1.0;
    std::uint64_t seed = 0;
    /// Shared daily shapes the households scale and shift.
    DailyProfile misc_load;
    DailyProfile hot_water_draw;
    TemperatureCurve ev_consumption_multiplier;

    bool operator==(Fleet const&) const = default;
};

struct SynthesisOptions
{
    std::size_t sample_size = 1000;
    SizingRule sizing = SizingRule::MaxOfBoth;
    HeatPumpProfile hp_profile = HeatPumpProfile::ColdClimate;
};

/// Stream seed for one county, independent of scheduling order.
std::uint64_t county_seed(std::uint64_t master_seed, std::string_view county_id);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Draw a fleet of representative households. Every household carries both
/// today's appliances and its fully electrified set; the scenario selects
/// which is active.
Fleet synthesize_fleet(
    CountySpec const& spec,
    Scenario scenario,
    std::uint64_t seed,
    SynthesisOptions const& options = {});

/// Electrify a seeded uniform subset of round(f N) households. Subsets are
/// nested in f for a fixed seed.
Fleet apply_adoption_rate(Fleet fleet, double fraction, std::uint64_t seed);

/// Randomized overnight heating setback for every household: start 21-24 h,
/// 6-9 h long, 1-4 degC deep.
Fleet apply_night_setback(Fleet fleet, std::uint64_t seed);

} // namespace gridimpact
