#pragma once

#include "gridimpact/fleet.hpp"
#include "gridimpact/lp.hpp"
#include "gridimpact/simulation.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gridimpact
{

inline constexpr double kEnvelopeUpgradeFactor = 1.25;
inline constexpr double kGroundSourceCopFactor = 1.5;

/// Multiply every household's envelope resistance by 1.25. Equipment is not
/// resized.
Fleet apply_envelope_upgrade(Fleet fleet);

/// Replace every electrified heat pump by a ground-source unit: constant
/// capacity equal to nameplate and constant COP of 1.5 times the air-source
/// COP at the rating point (heating and cooling separately).
Fleet apply_gshp(Fleet fleet);

/// One thermal input of a first-order store. Electric draw is
/// thermal / cop; an infinite cop marks a non-electric source.
struct ThermalSource
{
    std::string name;
    double sign = 1.0;            ///< +1 adds heat, -1 removes it
    std::vector<double> cap_kw;   ///< thermal, per step
    std::vector<double> cop;      ///< per step
};

enum class LoadCategory
{
    Hvac,
    Water,
};

/// x_k = a x_{k-1} + offset_k + gain * sum_j sign_j q_{j,k}
struct ThermalStore
{
    std::size_t household = 0;
    LoadCategory category = LoadCategory::Hvac;
    std::string name;
    double a = 0.0;
    double gain = 0.0;
    double initial = 0.0;
    std::vector<double> offset;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> slack_below; ///< allowed relaxation under `lower`, per step
    std::vector<double> slack_above; ///< allowed relaxation over `upper`, per step
    std::vector<ThermalSource> sources;
};

/// E_k = a E_{k-1} + gain (eta p_k - w_k + u_k), u the unserved drive.
struct BatteryStore
{
    std::size_t household = 0;
    std::string name;
    double a = 1.0;
    double gain = 0.0;
    double efficiency = 1.0;
    double capacity_kwh = 0.0;
    double initial = 0.0;
    std::vector<double> charge_cap_kw; ///< zero while unplugged
    std::vector<double> drive_kw;
    std::vector<double> min_energy;    ///< end-of-step targets
    std::vector<double> unserved_cap;
};

/// Peak-minimization program over one horizon.
struct CoordinationProblem
{
    std::size_t steps = 0;
    std::vector<double> fixed_kw; ///< inflexible load per step
    std::vector<ThermalStore> thermal;
    std::vector<BatteryStore> batteries;
    double comfort_penalty = 10.0;   ///< per degC-step of band relaxation
    double unserved_penalty = 100.0; ///< per kW-step of unserved drive
    double peak_cap = lp::kInf;

    void validate() const;
};

struct CoordinationSchedule
{
    lp::Status status = lp::Status::NumericalError;
    int iterations = 0;
    std::size_t variables = 0;
    std::size_t constraints = 0;
    double peak_kw = 0.0;                 ///< objective peak variable
    std::vector<double> electric_kw;      ///< flexible plus fixed load per step
    std::vector<std::vector<std::vector<double>>> thermal_inputs; ///< [store][source][step]
    std::vector<std::vector<double>> thermal_states;              ///< [store][step]
    std::vector<std::vector<double>> slack;                       ///< [store][step], both sides
    std::vector<std::vector<double>> charge_kw;                   ///< [battery][step]
    std::vector<std::vector<double>> unserved_kw;                 ///< [battery][step]
    std::vector<std::vector<double>> battery_states;              ///< [battery][step]
    double dynamics_residual = 0.0; ///< max |state - forward recursion of the inputs|
    double bound_violation = 0.0;   ///< worst bound or band violation of the schedule
};

lp::Problem to_lp(CoordinationProblem const& problem);
CoordinationSchedule solve_coordination(CoordinationProblem const& problem, lp::Options const& options = {});

/// Electric draw of every store and battery per step for a schedule.
std::vector<double> flexible_load(CoordinationProblem const& problem, CoordinationSchedule const& s);

enum class ComfortMode
{
    Auto,    ///< whichever of heating and cooling delivered more energy uncoordinated
    Heating,
    Cooling,
};

struct CoordinationOptions
{
    double comfort_below_c = 1.0;
    double comfort_above_c = 2.0;
    double tank_below_c = 5.0;
    double tank_above_c = 0.0;
    double comfort_penalty = 10.0;
    double unserved_penalty = 100.0;
    ComfortMode mode = ComfortMode::Auto;
    lp::Options lp;
    /// Called with the linear program before it is solved.
    std::function<void(lp::Problem const&)> on_program;
};

/// Coordination program of a fleet over the scored steps of a window, with
/// initial states and slack caps taken from the uncoordinated run.
CoordinationProblem build_coordination_problem(
    Fleet const& fleet,
    SimWindow const& w,
    std::vector<HouseholdTrace> const& uncoordinated,
    CoordinationOptions const& options = {});

struct CoordinationResult
{
    AggregateProfile uncoordinated;
    AggregateProfile coordinated;
    CoordinationSchedule schedule;
    std::size_t relaxed_households = 0;
    bool fell_back = false; ///< solver failed or did not improve peak99; uncoordinated kept
    std::vector<std::string> notes;
};

CoordinationResult coordinate_fleet(
    Fleet const& fleet,
    SimWindow const& w,
    CoordinationOptions const& options = {});

/// Bit set of DSM strategies.
enum StrategyBits : unsigned
{
    kEnvelope = 1u,
    kGroundSource = 2u,
    kCoordinate = 4u,
};

std::string strategy_label(unsigned mask);

struct StrategyReduction
{
    unsigned mask = 0;
    std::string label;
    double total_cost = 0.0;
    double reduction_pct = 0.0;
};

/// Percentage reduction of total cost for every strategy subset present in
/// `costs`, relative to the empty set (which must be present).
std::vector<StrategyReduction> dsm_cost_reduction_report(std::map<unsigned, double> const& costs);

} // namespace gridimpact
