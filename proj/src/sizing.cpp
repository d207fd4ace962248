#include "gridimpact/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gridimpact
{

DesignLoads design_loads(
    BuildingEnvelope const& env,
    double heat_setpoint_c,
    double cool_setpoint_c,
    DesignConditions const& design,
    double gain_allowance_kw)
{
    env.validate();
    DesignLoads loads;
    loads.heating_kw = std::max(0.0, (heat_setpoint_c - design.heating_c) / env.resistance);
    loads.cooling_kw = std::max(
        0.0, (design.cooling_c - cool_setpoint_c) / env.resistance + gain_allowance_kw);
    return loads;
}

SizingRule parse_sizing_rule(std::string_view s)
{
    if (s == "max-of-both")
    {
        return SizingRule::MaxOfBoth;
    }
    if (s == "cooling-only")
    {
        return SizingRule::CoolingOnly;
    }
    throw std::invalid_argument("unknown sizing rule '" + std::string(s) + "'");
}

std::string_view to_string(SizingRule r)
{
    return r == SizingRule::MaxOfBoth ? "max-of-both" : "cooling-only";
}

double ReferenceUnit::heating_ratio(double outdoor_c) const
{
    return heating.at(outdoor_c).capacity_kw / nameplate_kw();
}

double ReferenceUnit::cooling_ratio(double outdoor_c) const
{
    return cooling.at(outdoor_c).capacity_kw / nameplate_kw();
}

HeatPumpUnit ReferenceUnit::with_nameplate(double nameplate) const
{
    double const f = nameplate / nameplate_kw();
    return {heating.scaled(f), cooling.scaled(f), nameplate};
}

HeatPumpSystem size_equipment(
    DesignLoads const& loads,
    DesignConditions const& design,
    SizingRule rule,
    ReferenceUnit const& central,
    ReferenceUnit const& minisplit)
{
    if (loads.heating_kw < 0.0 || loads.cooling_kw < 0.0)
    {
        throw std::invalid_argument("size_equipment: negative design load");
    }
    double const h_ratio = central.heating_ratio(design.heating_c);
    double const c_ratio = central.cooling_ratio(design.cooling_c);
    if (!(h_ratio > 0.0) || !(c_ratio > 0.0))
    {
        throw std::invalid_argument("size_equipment: reference unit has no capacity at design conditions");
    }
    double const for_cooling = loads.cooling_kw / c_ratio;
    double const for_heating = loads.heating_kw / h_ratio;
    double const required =
        rule == SizingRule::MaxOfBoth ? std::max(for_heating, for_cooling) : for_cooling;

    HeatPumpSystem sys;
    double const nameplate = std::min(required, kMaxCentralNameplateKw);
    sys.central = central.with_nameplate(nameplate);

    double const heat_gap =
        loads.heating_kw - hp_performance(sys.central, design.heating_c).capacity_kw;
    double const cool_gap =
        loads.cooling_kw - hp_cooling_performance(sys.central, design.cooling_c).capacity_kw;

    if (required > kMaxCentralNameplateKw)
    {
        double const mh = minisplit.heating_ratio(design.heating_c);
        double const mc = minisplit.cooling_ratio(design.cooling_c);
        double tier = kMinisplitTiersKw.back();
        for (double t : kMinisplitTiersKw)
        {
            bool const covers_cooling = t * mc >= cool_gap;
            bool const covers_heating = rule == SizingRule::CoolingOnly || t * mh >= heat_gap;
            if (covers_cooling && covers_heating)
            {
                tier = t;
                break;
            }
        }
        sys.minisplit = minisplit.with_nameplate(tier);
    }

    double const heat_residual = loads.heating_kw - sys.heating_capacity(design.heating_c);
    sys.backup_kw = heat_residual > 1e-9 ? std::ceil(heat_residual - 1e-9) : 0.0;
    return sys;
}

double design_heating_capacity(HeatPumpSystem const& sys, DesignConditions const& design)
{
    return sys.heating_capacity(design.heating_c) + sys.backup_kw;
}

} // namespace gridimpact
