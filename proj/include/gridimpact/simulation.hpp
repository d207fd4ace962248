#pragma once

#include "gridimpact/devices.hpp"
#include "gridimpact/fleet.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gridimpact
{

/// Index range into a weather series: warm-up from `warmup_begin`, scored
/// samples in [scored_begin, scored_end).
struct WeekWindow
{
    std::size_t warmup_begin = 0;
    std::size_t scored_begin = 0;
    std::size_t scored_end = 0;

    bool operator==(WeekWindow const&) const = default;
};

struct PeakWeeks
{
    WeekWindow heating;
    WeekWindow cooling;
};

inline constexpr double kWarmupHours = 24.0;
inline constexpr double kWeekHours = 168.0;

/// Seven-day windows centred on the annual minimum and maximum outdoor
/// temperature (earliest sample on ties), shifted inside the series when
/// needed, each with a 24 h warm-up prefix (shorter when the extreme falls
/// in the first day).
PeakWeeks select_peak_weeks(WeatherSeries const& weather);

struct SimulationOptions
{
    double dt_hours = 0.25;
    unsigned jobs = 1;
};

/// Simulation grid for one window: outdoor temperature interpolated to dt,
/// calendar information per step.
struct SimWindow
{
    double dt_hours = 0.25;
    std::size_t warmup_steps = 0;
    std::vector<Timestamp> timestamps;  ///< start of each step, warm-up included
    std::vector<double> outdoor_c;
    std::vector<double> hour_of_day;
    std::vector<bool> weekend;

    std::size_t steps() const { return outdoor_c.size(); }
    std::size_t scored_steps() const { return steps() - warmup_steps; }
};

SimWindow make_window(WeatherSeries const& weather, WeekWindow const& week, double dt_hours);

/// Per-step trip data for one vehicle.
struct VehicleSchedule
{
    std::vector<bool> plugged_in;
    std::vector<double> drive_kw;
    /// Steps at which the vehicle leaves home (first unplugged step of a trip).
    std::vector<std::size_t> departures;
};

VehicleSchedule vehicle_schedule(Vehicle const& v, TemperatureCurve const& multiplier, SimWindow const& w);

/// Exogenous series of one household over a window.
struct HouseholdInputs
{
    std::vector<double> misc_kw;  ///< electric plug load
    std::vector<double> gain_kw;  ///< total internal and solar gain
    std::vector<double> draw_kw;  ///< hot-water draw, thermal
    std::vector<double> heat_setpoint_c;
    std::vector<double> cool_setpoint_c;
    std::vector<std::size_t> electric_vehicles; ///< indices into Household::vehicles
    std::vector<VehicleSchedule> vehicles;      ///< one per electric vehicle
};

HouseholdInputs household_inputs(Fleet const& fleet, Household const& h, SimWindow const& w);

/// Electric demand of one household per step, by category (unscaled).
struct HouseholdTrace
{
    std::vector<double> misc_kw;
    std::vector<double> water_kw;
    std::vector<double> ev_kw;
    std::vector<double> hvac_kw;
    std::vector<double> hvac_thermal_kw; ///< signed
    std::vector<double> indoor_c;  ///< end-of-step indoor temperature
    std::vector<double> tank_c;    ///< end-of-step tank temperature (empty without electric water)
    std::vector<std::vector<double>> ev_energy_kwh; ///< end-of-step energy per electric vehicle
    double backup_kwh = 0.0;       ///< resistance backup energy over scored steps
    std::size_t depleted_steps = 0;
    std::size_t comfort_violation_steps = 0;
};

HouseholdTrace simulate_household(Fleet const& fleet, Household const& h, SimWindow const& w);

struct SimDiagnostics
{
    std::size_t depleted_households = 0;
    std::size_t depleted_steps = 0;
    std::size_t comfort_violation_households = 0;
    double backup_kwh = 0.0; ///< scaled
};

/// Aggregate electric demand over the scored steps, scaled to the county.
struct AggregateProfile
{
    std::vector<Timestamp> timestamps;
    std::vector<double> total_kw;
    std::vector<double> misc_kw;
    std::vector<double> water_kw;
    std::vector<double> ev_kw;
    std::vector<double> hvac_kw;
    SimDiagnostics diagnostics;

    std::size_t size() const { return total_kw.size(); }
    /// Index of the largest total (earliest on ties).
    std::size_t peak_index() const;
};

AggregateProfile simulate_week(Fleet const& fleet, SimWindow const& w, SimulationOptions const& options = {});

/// Build an aggregate profile from per-household traces over the scored
/// steps. Households are summed in index-ordered blocks.
AggregateProfile aggregate(
    std::span<HouseholdTrace const> traces,
    SimWindow const& w,
    double scale_factor);

/// Nearest-rank 99th percentile.
double peak99(std::span<double const> values);

struct GridCapacityEstimate
{
    double peak99_kw = 0.0;
    double headroom = 0.0;

    double capacity_kw() const { return peak99_kw * (1.0 + headroom); }
};

struct ReinforcementRequirement
{
    std::string county_id;
    double g_kw = 0.0;
};

ReinforcementRequirement reinforcement_requirement(
    std::string county_id,
    GridCapacityEstimate const& bau,
    GridCapacityEstimate const& future);

inline constexpr double kFutureHeadroom = 0.20;

/// Today's headroom of a county, drawn uniformly on the county's range from a
/// stream seeded by the county id alone.
double bau_headroom(CountySpec const& spec);

/// County peak: the larger peak99 of the heating and cooling weeks.
struct CountyPeak
{
    double peak99_kw = 0.0;
    AggregateProfile heating;
    AggregateProfile cooling;
};

CountyPeak simulate_county(
    Fleet const& fleet,
    SimWindow const& heating,
    SimWindow const& cooling,
    SimulationOptions const& options = {});

struct MonteCarloResult
{
    std::vector<double> peaks_kw;
    double mean = 0.0;
    double std = 0.0;
    double skewness = 0.0;
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
};

/// Summary statistics and a histogram of a sample.
MonteCarloResult summarize_peaks(std::vector<double> peaks, std::size_t bins = 20);

/// Resynthesize and simulate a fleet once per seed.
MonteCarloResult monte_carlo_peaks(
    CountySpec const& spec,
    Scenario scenario,
    SimWindow const& heating,
    SimWindow const& cooling,
    std::span<std::uint64_t const> seeds,
    SynthesisOptions const& synthesis = {},
    SimulationOptions const& options = {});

/// Seeds for `runs` independent runs derived from a master seed.
std::vector<std::uint64_t> run_seeds(std::uint64_t master_seed, std::size_t runs);

} // namespace gridimpact
