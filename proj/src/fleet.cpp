#include "gridimpact/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace gridimpact
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stream tags keep the per-household generators of different draws apart.
constexpr std::uint64_t kHouseholdStream = 0x686f757365ULL;
constexpr std::uint64_t kAdoptionStream = 0x61646f7074ULL;
constexpr std::uint64_t kSetbackStream = 0x7365746261ULL;

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(std::mt19937_64& rng)
{
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

bool bernoulli(std::mt19937_64& rng, double p)
{
    return uniform(rng, 0.0, 1.0) < p;
}

void require(bool ok, std::string const& field, std::string const& what)
{
    if (!ok)
    {
        throw std::invalid_argument("county spec: " + field + ": " + what);
    }
}

bool is_probability(double p)
{
    return std::isfinite(p) && p >= 0.0 && p <= 1.0;
}

WaterHeaterTank base_tank(std::mt19937_64& rng)
{
    WaterHeaterTank t;
    double const litres = uniform(rng, 150.0, 230.0);
    t.capacitance = litres * 4.186 / 3600.0; // kWh/degC
    t.resistance = uniform(rng, 80.0, 140.0);
    t.ambient_c = 20.0;
    t.setpoint_c = uniform(rng, 48.0, 55.0);
    return t;
}

WaterHeaterTank resistance_tank(WaterHeaterTank t)
{
    t.cop = 1.0;
    t.hp_electric_kw = 0.0;
    t.resistance_kw = 4.5;
    return t;
}

WaterHeaterTank heat_pump_tank(WaterHeaterTank t)
{
    t.cop = 3.0;
    t.hp_electric_kw = 0.5;
    t.resistance_kw = 4.5;
    return t;
}

Vehicle draw_vehicle(std::mt19937_64& rng, CountySpec const& spec)
{
    Vehicle v;
    v.large = bernoulli(rng, spec.large_vehicle_fraction);
    VehicleClass const& cls = v.large ? spec.equipment.large_vehicle : spec.equipment.small_vehicle;
    v.battery.capacity_kwh = cls.battery_kwh;
    v.battery.charge_kw = cls.charger_kw;
    v.battery.dissipation_per_h = spec.equipment.ev_dissipation_per_h;
    v.battery.efficiency = spec.equipment.ev_charge_efficiency;
    v.kwh_per_km = cls.kwh_per_km;
    v.electric_today = bernoulli(rng, spec.bau.electric_vehicles);

    double const km = spec.commute_km_median * std::exp(spec.commute_km_sigma * normal(rng));
    v.trips.commute_km = std::clamp(km, 1.0, 150.0);
    v.trips.depart_hour = uniform(rng, 6.0, 9.5);
    v.trips.work_hours = uniform(rng, 6.0, 10.0);
    v.trips.weekend_depart_hour = uniform(rng, 10.0, 13.0);
    v.trips.weekend_hours = uniform(rng, 2.0, 4.0);
    v.trips.weekend_km = v.trips.commute_km * uniform(rng, 0.5, 1.5);
    return v;
}

HvacEquipment size_heat_pump(
    DesignLoads const& loads,
    DesignConditions const& design,
    SizingRule rule,
    ReferenceUnit const& ref)
{
    HvacEquipment hvac;
    hvac.heating = HeatingSource::HeatPump;
    hvac.has_cooling = true;
    hvac.unit = size_equipment(loads, design, rule, ref, ref);
    return hvac;
}

} // namespace

TemperatureCurve::TemperatureCurve(std::vector<std::pair<double, double>> nodes)
    : nodes_(std::move(nodes))
{
    if (nodes_.empty())
    {
        throw std::invalid_argument("temperature curve: no nodes");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
    {
        if (!std::isfinite(nodes_[i].first) || !std::isfinite(nodes_[i].second))
        {
            throw std::invalid_argument("temperature curve: non-finite node");
        }
        if (i > 0 && !(nodes_[i].first > nodes_[i - 1].first))
        {
            throw std::invalid_argument("temperature curve: temperatures not strictly increasing");
        }
    }
}

double TemperatureCurve::at(double outdoor_c) const
{
    if (nodes_.empty())
    {
        throw std::logic_error("temperature curve: empty");
    }
    if (outdoor_c <= nodes_.front().first)
    {
        return nodes_.front().second;
    }
    if (outdoor_c >= nodes_.back().first)
    {
        return nodes_.back().second;
    }
    auto hi = std::upper_bound(
        nodes_.begin(), nodes_.end(), outdoor_c, [](double x, auto const& n) { return x < n.first; });
    auto lo = hi - 1;
    double const t = (outdoor_c - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

DailyProfile::DailyProfile(std::vector<double> samples_kw) : samples_(std::move(samples_kw))
{
    if (samples_.empty())
    {
        throw std::invalid_argument("daily profile: no samples");
    }
    for (double v : samples_)
    {
        if (!std::isfinite(v) || v < 0.0)
        {
            throw std::invalid_argument("daily profile: values must be finite and non-negative");
        }
    }
}

double DailyProfile::at_hour(double hour_of_day) const
{
    if (samples_.empty())
    {
        return 0.0;
    }
    double const n = static_cast<double>(samples_.size());
    double x = std::fmod(hour_of_day / 24.0 * n, n);
    if (x < 0.0)
    {
        x += n;
    }
    auto const i = static_cast<std::size_t>(x) % samples_.size();
    auto const j = (i + 1) % samples_.size();
    double const t = x - std::floor(x);
    return samples_[i] + t * (samples_[j] - samples_[i]);
}

double DailyProfile::mean() const
{
    if (samples_.empty())
    {
        return 0.0;
    }
    return std::accumulate(samples_.begin(), samples_.end(), 0.0) / static_cast<double>(samples_.size());
}

double DailyProfile::peak() const
{
    return samples_.empty() ? 0.0 : *std::max_element(samples_.begin(), samples_.end());
}

int CountySpec::climate_zone_number() const
{
    int z = 0;
    for (char c : climate_zone)
    {
        if (c < '0' || c > '9')
        {
            break;
        }
        z = z * 10 + (c - '0');
    }
    return z;
}

void CountySpec::validate() const
{
    require(!county_id.empty(), "county_id", "empty");
    require(true_household_count >= 1, "true_household_count", "must be at least 1");
    require(std::isfinite(design.heating_c) && std::isfinite(design.cooling_c),
            "design_temperatures", "non-finite");

    require(!housing_mix.empty(), "housing_mix", "empty");
    double wsum = 0.0;
    for (auto const& h : housing_mix)
    {
        require(std::isfinite(h.weight) && h.weight >= 0.0, "housing_mix.weight",
                "negative or non-finite for type '" + h.type + "'");
        require(h.resistance > 0.0 && std::isfinite(h.resistance), "housing_mix.resistance",
                "must be positive for type '" + h.type + "'");
        require(h.capacitance > 0.0 && std::isfinite(h.capacitance), "housing_mix.capacitance",
                "must be positive for type '" + h.type + "'");
        require(h.floor_area_m2 > 0.0, "housing_mix.floor_area_m2",
                "must be positive for type '" + h.type + "'");
        wsum += h.weight;
    }
    require(std::abs(wsum - 1.0) <= 1e-9, "housing_mix.weight", "does not sum to 1");
    require(envelope_sigma >= 0.0 && std::isfinite(envelope_sigma), "envelope_sigma", "negative");

    require(!vehicles_per_household.empty(), "vehicles_per_household", "empty");
    double vsum = 0.0;
    for (auto const& v : vehicles_per_household)
    {
        require(v.count >= 0, "vehicles_per_household.count", "negative");
        require(is_probability(v.probability), "vehicles_per_household.probability", "outside [0,1]");
        vsum += v.probability;
    }
    require(std::abs(vsum - 1.0) <= 1e-9, "vehicles_per_household.probability", "does not sum to 1");
    require(is_probability(large_vehicle_fraction), "large_vehicle_fraction", "outside [0,1]");
    require(commute_km_median > 0.0, "commute_km.median", "must be positive");
    require(commute_km_sigma >= 0.0, "commute_km.sigma", "negative");

    auto const [hlo, hhi] = bau_headroom_range;
    require(hlo >= 0.0 && hhi >= hlo && std::isfinite(hhi), "bau_headroom_range", "must satisfy 0 <= lo <= hi");

    require(is_probability(bau.resistance_heating), "bau.resistance_heating", "outside [0,1]");
    require(is_probability(bau.heat_pump_heating), "bau.heat_pump_heating", "outside [0,1]");
    require(bau.resistance_heating + bau.heat_pump_heating <= 1.0 + 1e-9, "bau.heat_pump_heating",
            "resistance and heat-pump shares exceed 1");
    require(is_probability(bau.air_conditioning), "bau.air_conditioning", "outside [0,1]");
    require(is_probability(bau.electric_water_heating), "bau.electric_water_heating", "outside [0,1]");
    require(is_probability(bau.electric_vehicles), "bau.electric_vehicles", "outside [0,1]");
    require(is_probability(heat_pump_water_heater_fraction), "heat_pump_water_heater_fraction",
            "outside [0,1]");

    require(heat_setpoint.sd >= 0.0 && cool_setpoint.sd >= 0.0, "setpoints", "negative spread");
    require(heat_setpoint.mean < cool_setpoint.mean, "setpoints", "heating mean must be below cooling mean");
    require(!misc_load.empty(), "misc_load", "missing");
    require(!hot_water_draw.empty(), "hot_water_draw", "missing");
    require(load_scale_sigma >= 0.0, "load_scale_sigma", "negative");

    require(!equipment.heat_pump_today.heating.empty() && !equipment.heat_pump_today.cooling.empty(),
            "curves.today", "missing");
    require(!equipment.heat_pump_cold_climate.heating.empty() &&
                !equipment.heat_pump_cold_climate.cooling.empty(),
            "curves.cold_climate", "missing");
    require(!equipment.ev_consumption_multiplier.empty(), "curves.ev_consumption", "missing");
    require(equipment.ev_charge_efficiency > 0.0 && equipment.ev_charge_efficiency <= 1.0,
            "vehicles.charge_efficiency", "outside (0,1]");
}

std::string_view to_string(Scenario s)
{
    return s == Scenario::Bau ? "bau" : "all-electric";
}

double Thermostat::heat_at(double hour_of_day) const
{
    if (!setback)
    {
        return heat_setpoint_c;
    }
    double const since = std::fmod(std::fmod(hour_of_day - setback->start_hour, 24.0) + 24.0, 24.0);
    return since < setback->duration_hours ? heat_setpoint_c - setback->depth_c : heat_setpoint_c;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    return splitmix64(splitmix64(a) ^ (b + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

std::uint64_t county_seed(std::uint64_t master_seed, std::string_view county_id)
{
    return mix_seed(master_seed, fnv1a(county_id));
}

Fleet synthesize_fleet(
    CountySpec const& spec,
    Scenario scenario,
    std::uint64_t seed,
    SynthesisOptions const& options)
{
    spec.validate();

    Fleet fleet;
    fleet.county_id = spec.county_id;
    fleet.seed = seed;
    fleet.scale_factor = options.sample_size == 0
        ? 1.0
        : static_cast<double>(spec.true_household_count) / static_cast<double>(options.sample_size);
    fleet.misc_load = spec.misc_load;
    fleet.hot_water_draw = spec.hot_water_draw;
    fleet.ev_consumption_multiplier = spec.equipment.ev_consumption_multiplier;

    int const zone = spec.climate_zone_number();
    bool const cold_zone = zone == 6 || zone == 7;
    ReferenceUnit const& electrified_ref =
        options.hp_profile == HeatPumpProfile::ColdClimate && cold_zone
        ? spec.equipment.heat_pump_cold_climate
        : spec.equipment.heat_pump_today;

    std::vector<double> arch_weights;
    for (auto const& h : spec.housing_mix)
    {
        arch_weights.push_back(h.weight);
    }
    std::vector<double> vehicle_weights;
    for (auto const& v : spec.vehicles_per_household)
    {
        vehicle_weights.push_back(v.probability);
    }

    fleet.households.reserve(options.sample_size);
    for (std::size_t i = 0; i < options.sample_size; ++i)
    {
        std::mt19937_64 rng(mix_seed(mix_seed(seed, kHouseholdStream), i));
        Household h;

        auto const& arch = spec.housing_mix[std::discrete_distribution<std::size_t>(
            arch_weights.begin(), arch_weights.end())(rng)];
        h.archetype = arch.type;
        h.floor_area_m2 = arch.floor_area_m2;
        double const s = spec.envelope_sigma;
        h.envelope.resistance = arch.resistance * std::exp(s * normal(rng) - 0.5 * s * s);
        h.envelope.capacitance = arch.capacitance * std::exp(s * normal(rng) - 0.5 * s * s);

        h.thermostat.heat_setpoint_c =
            std::clamp(spec.heat_setpoint.mean + spec.heat_setpoint.sd * normal(rng), 16.0, 24.0);
        h.thermostat.cool_setpoint_c = std::clamp(
            spec.cool_setpoint.mean + spec.cool_setpoint.sd * normal(rng),
            h.thermostat.heat_setpoint_c + 1.5,
            29.0);

        double const ls = spec.load_scale_sigma;
        h.loads.misc_scale = std::exp(ls * normal(rng) - 0.5 * ls * ls);
        h.loads.misc_shift_h = uniform(rng, -1.0, 1.0);
        h.loads.draw_scale = std::exp(ls * normal(rng) - 0.5 * ls * ls);
        h.loads.draw_shift_h = uniform(rng, -1.0, 1.0);
        h.loads.solar_peak_kw = 0.004 * arch.floor_area_m2 * uniform(rng, 0.5, 1.0);

        double const allowance = spec.misc_load.peak() * h.loads.misc_scale + h.loads.occupant_kw;
        DesignLoads const loads = design_loads(
            h.envelope, h.thermostat.heat_setpoint_c, h.thermostat.cool_setpoint_c, spec.design, allowance);

        // Today's equipment.
        double const u_heat = uniform(rng, 0.0, 1.0);
        bool const has_ac = bernoulli(rng, spec.bau.air_conditioning);
        bool const electric_water = bernoulli(rng, spec.bau.electric_water_heating);
        bool const hpwh = bernoulli(rng, spec.heat_pump_water_heater_fraction);
        WaterHeaterTank const tank = base_tank(rng);

        if (u_heat < spec.bau.resistance_heating)
        {
            h.today.hvac.heating = HeatingSource::Resistance;
            h.today.hvac.heater_kw = std::ceil(1.2 * loads.heating_kw);
        }
        else if (u_heat < spec.bau.resistance_heating + spec.bau.heat_pump_heating)
        {
            h.today.hvac = size_heat_pump(loads, spec.design, options.sizing, spec.equipment.heat_pump_today);
        }
        else
        {
            h.today.hvac.heating = HeatingSource::Fossil;
            h.today.hvac.heater_kw = 1.4 * loads.heating_kw;
        }
        if (h.today.hvac.heating != HeatingSource::HeatPump && has_ac)
        {
            h.today.hvac.has_cooling = true;
            h.today.hvac.unit = size_equipment(
                loads, spec.design, SizingRule::CoolingOnly,
                spec.equipment.heat_pump_today, spec.equipment.heat_pump_today);
            h.today.hvac.unit.backup_kw = 0.0;
        }
        h.today.water.electric = electric_water;
        h.today.water.tank = resistance_tank(tank);

        h.electrified_set.hvac = size_heat_pump(loads, spec.design, options.sizing, electrified_ref);
        h.electrified_set.water.electric = true;
        h.electrified_set.water.tank = hpwh ? heat_pump_tank(tank) : resistance_tank(tank);

        int const n_vehicles = spec.vehicles_per_household[std::discrete_distribution<std::size_t>(
            vehicle_weights.begin(), vehicle_weights.end())(rng)].count;
        for (int v = 0; v < n_vehicles; ++v)
        {
            h.vehicles.push_back(draw_vehicle(rng, spec));
        }

        h.electrified = scenario == Scenario::AllElectric;
        fleet.households.push_back(std::move(h));
    }
    return fleet;
}

Fleet apply_adoption_rate(Fleet fleet, double fraction, std::uint64_t seed)
{
    if (!(fraction >= 0.0 && fraction <= 1.0))
    {
        throw std::invalid_argument("apply_adoption_rate: fraction must lie in [0,1]");
    }
    std::size_t const n = fleet.households.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, kAdoptionStream));
    for (std::size_t i = n; i > 1; --i)
    {
        std::size_t const j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        std::swap(order[i - 1], order[j]);
    }
    auto const k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    for (std::size_t r = 0; r < n; ++r)
    {
        fleet.households[order[r]].electrified = r < k;
    }
    return fleet;
}

Fleet apply_night_setback(Fleet fleet, std::uint64_t seed)
{
    std::uint64_t const stream = mix_seed(seed, kSetbackStream);
    for (std::size_t i = 0; i < fleet.households.size(); ++i)
    {
        std::mt19937_64 rng(mix_seed(stream, i));
        Setback sb;
        sb.start_hour = uniform(rng, 21.0, 24.0);
        sb.duration_hours = uniform(rng, 6.0, 9.0);
        sb.depth_c = uniform(rng, 1.0, 4.0);
        fleet.households[i].thermostat.setback = sb;
    }
    return fleet;
}

} // namespace gridimpact
