#pragma once

#include "gridimpact/devices.hpp"

#include <array>
#include <string_view>

namespace gridimpact
{

struct DesignLoads
{
    double heating_kw = 0.0;
    double cooling_kw = 0.0;
};

/// Outdoor design conditions of a county.
struct DesignConditions
{
    double heating_c = -10.0; ///< 99% heating design temperature
    double cooling_c = 32.0;  ///< 1% cooling design temperature
};

/// Steady-state envelope conduction at the design temperatures. Heating gets
/// no credit for internal gains; cooling adds `gain_allowance_kw`.
DesignLoads design_loads(
    BuildingEnvelope const& env,
    double heat_setpoint_c,
    double cool_setpoint_c,
    DesignConditions const& design,
    double gain_allowance_kw);

enum class SizingRule
{
    MaxOfBoth,   ///< meet the larger of the design heating and cooling loads
    CoolingOnly, ///< meet the design cooling load; backup carries the heating gap
};

SizingRule parse_sizing_rule(std::string_view s);
std::string_view to_string(SizingRule r);

/// Performance curves of a reference unit. The unit's nameplate is its
/// cooling capacity at the cooling rating point; sizing scales the curves.
struct ReferenceUnit
{
    PerformanceCurve heating;
    PerformanceCurve cooling;

    double nameplate_kw() const { return cooling.at(kCoolingRatingC).capacity_kw; }
    /// Heating capacity per kW of nameplate at the given outdoor temperature.
    double heating_ratio(double outdoor_c) const;
    double cooling_ratio(double outdoor_c) const;
    HeatPumpUnit with_nameplate(double nameplate_kw) const;
};

/// Nameplate cooling capacities of the available mini-split heat pumps
/// (one, two and three tons).
inline constexpr std::array<double, 3> kMinisplitTiersKw{3.5, 7.05, 10.6};

/// Size a central heat pump (capped at five tons), a mini-split when the cap
/// binds, and resistance backup for whatever design heating load remains,
/// rounded up to the next whole kW.
HeatPumpSystem size_equipment(
    DesignLoads const& loads,
    DesignConditions const& design,
    SizingRule rule,
    ReferenceUnit const& central,
    ReferenceUnit const& minisplit);

/// Thermal heating capacity of a sized system at the heating design
/// temperature, backup included.
double design_heating_capacity(HeatPumpSystem const& sys, DesignConditions const& design);

} // namespace gridimpact
