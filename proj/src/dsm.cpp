#include "gridimpact/dsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridimpact
{

namespace
{

constexpr double kRelaxedTolerance = 1e-6;
// Keeps the uncoordinated trajectory strictly inside the bounds built from it.
constexpr double kBoundMargin = 1e-9;

HeatPumpUnit ground_source(HeatPumpUnit const& air)
{
    double const cap = air.nameplate_cooling_kw;
    double const heat_cop = kGroundSourceCopFactor * hp_performance(air, kHeatingRatingC).cop;
    double const cool_cop = kGroundSourceCopFactor * hp_cooling_performance(air, kCoolingRatingC).cop;
    return {PerformanceCurve::constant(cap, heat_cop), PerformanceCurve::constant(cap, cool_cop), cap};
}

void check_length(std::vector<double> const& v, std::size_t n, std::string const& what)
{
    if (v.size() != n)
    {
        throw std::invalid_argument("coordination problem: " + what + " has wrong length");
    }
    for (double x : v)
    {
        if (std::isnan(x))
        {
            throw std::invalid_argument("coordination problem: " + what + " contains NaN");
        }
    }
}

double electric_weight(double cop)
{
    return std::isfinite(cop) ? 1.0 / cop : 0.0;
}

// Variable indices of one solved program.
struct Layout
{
    int peak = -1;
    std::vector<std::vector<int>> x;                // [store][k]
    std::vector<std::vector<std::vector<int>>> q;   // [store][source][k]
    std::vector<std::vector<int>> s_below, s_above; // [store][k], -1 when absent
    std::vector<std::vector<int>> e, p, u;          // [battery][k]
};

lp::Problem build_lp(CoordinationProblem const& pb, Layout& lay)
{
    pb.validate();
    std::size_t const K = pb.steps;
    lp::Problem lp;
    double fixed_max = 0.0;
    for (double f : pb.fixed_kw)
    {
        fixed_max = std::max(fixed_max, f);
    }
    lay.peak = lp.add_variable(std::min(fixed_max, pb.peak_cap), pb.peak_cap, 1.0, "P");

    std::vector<std::vector<lp::Term>> coupling(K);

    lay.x.resize(pb.thermal.size());
    lay.q.resize(pb.thermal.size());
    lay.s_below.resize(pb.thermal.size());
    lay.s_above.resize(pb.thermal.size());
    for (std::size_t t = 0; t < pb.thermal.size(); ++t)
    {
        auto const& st = pb.thermal[t];
        std::string const tag = st.name + "_" + std::to_string(t);
        lay.q[t].assign(st.sources.size(), std::vector<int>(K, -1));
        lay.x[t].assign(K, -1);
        lay.s_below[t].assign(K, -1);
        lay.s_above[t].assign(K, -1);
        for (std::size_t k = 0; k < K; ++k)
        {
            std::string const ks = "_" + std::to_string(k);
            // state = band part + slack above - slack below
            lay.x[t][k] = lp.add_variable(st.lower[k], st.upper[k], 0.0, "x_" + tag + ks);
            std::vector<lp::Term> dyn{{lay.x[t][k], 1.0}};
            if (st.slack_below[k] > 0.0)
            {
                lay.s_below[t][k] = lp.add_variable(0.0, st.slack_below[k], pb.comfort_penalty, "sl_" + tag + ks);
                dyn.push_back({lay.s_below[t][k], -1.0});
            }
            if (st.slack_above[k] > 0.0)
            {
                lay.s_above[t][k] = lp.add_variable(0.0, st.slack_above[k], pb.comfort_penalty, "su_" + tag + ks);
                dyn.push_back({lay.s_above[t][k], 1.0});
            }
            double rhs = st.offset[k];
            if (k == 0)
            {
                rhs += st.a * st.initial;
            }
            else
            {
                dyn.push_back({lay.x[t][k - 1], -st.a});
                if (lay.s_below[t][k - 1] >= 0)
                {
                    dyn.push_back({lay.s_below[t][k - 1], st.a});
                }
                if (lay.s_above[t][k - 1] >= 0)
                {
                    dyn.push_back({lay.s_above[t][k - 1], -st.a});
                }
            }
            for (std::size_t j = 0; j < st.sources.size(); ++j)
            {
                auto const& src = st.sources[j];
                int const v = lp.add_variable(0.0, src.cap_kw[k], 0.0, "q_" + tag + "_" + src.name + ks);
                lay.q[t][j][k] = v;
                dyn.push_back({v, -st.gain * src.sign});
                double const w = electric_weight(src.cop[k]);
                if (w != 0.0)
                {
                    coupling[k].push_back({v, w});
                }
            }
            lp.add_row(std::move(dyn), rhs, rhs, "dyn_" + tag + ks);
        }
    }

    lay.e.resize(pb.batteries.size());
    lay.p.resize(pb.batteries.size());
    lay.u.resize(pb.batteries.size());
    for (std::size_t b = 0; b < pb.batteries.size(); ++b)
    {
        auto const& bs = pb.batteries[b];
        std::string const tag = bs.name + "_" + std::to_string(b);
        lay.e[b].assign(K, -1);
        lay.p[b].assign(K, -1);
        lay.u[b].assign(K, -1);
        for (std::size_t k = 0; k < K; ++k)
        {
            std::string const ks = "_" + std::to_string(k);
            lay.e[b][k] = lp.add_variable(std::max(0.0, bs.min_energy[k]), bs.capacity_kwh, 0.0, "e_" + tag + ks);
            lay.p[b][k] = lp.add_variable(0.0, bs.charge_cap_kw[k], 0.0, "p_" + tag + ks);
            lay.u[b][k] = lp.add_variable(0.0, bs.unserved_cap[k], pb.unserved_penalty, "u_" + tag + ks);
            std::vector<lp::Term> dyn{
                {lay.e[b][k], 1.0}, {lay.p[b][k], -bs.gain * bs.efficiency}, {lay.u[b][k], -bs.gain}};
            double rhs = -bs.gain * bs.drive_kw[k];
            if (k == 0)
            {
                rhs += bs.a * bs.initial;
            }
            else
            {
                dyn.push_back({lay.e[b][k - 1], -bs.a});
            }
            lp.add_row(std::move(dyn), rhs, rhs, "ev_" + tag + ks);
            coupling[k].push_back({lay.p[b][k], 1.0});
        }
    }

    for (std::size_t k = 0; k < K; ++k)
    {
        coupling[k].push_back({lay.peak, -1.0});
        int const r = lp.add_row(std::move(coupling[k]), -lp::kInf, -pb.fixed_kw[k], "peak_" + std::to_string(k));
        lp.mark_linking(r);
    }
    return lp;
}

double value(std::vector<double> const& x, int v)
{
    return v < 0 ? 0.0 : x[static_cast<std::size_t>(v)];
}

} // namespace

Fleet apply_envelope_upgrade(Fleet fleet)
{
    for (auto& h : fleet.households)
    {
        h.envelope.resistance *= kEnvelopeUpgradeFactor;
    }
    return fleet;
}

Fleet apply_gshp(Fleet fleet)
{
    for (auto& h : fleet.households)
    {
        auto& hvac = h.electrified_set.hvac;
        if (hvac.heating != HeatingSource::HeatPump)
        {
            continue;
        }
        hvac.unit.central = ground_source(hvac.unit.central);
        if (hvac.unit.minisplit)
        {
            hvac.unit.minisplit = ground_source(*hvac.unit.minisplit);
        }
    }
    return fleet;
}

void CoordinationProblem::validate() const
{
    check_length(fixed_kw, steps, "fixed load");
    for (auto const& t : thermal)
    {
        if (!(t.a > 0.0 && t.a < 1.0))
        {
            throw std::invalid_argument("coordination problem: thermal decay outside (0,1) for " + t.name);
        }
        if (!std::isfinite(t.gain) || !std::isfinite(t.initial))
        {
            throw std::invalid_argument("coordination problem: non-finite coefficient for " + t.name);
        }
        check_length(t.offset, steps, t.name + " offset");
        check_length(t.lower, steps, t.name + " lower band");
        check_length(t.upper, steps, t.name + " upper band");
        check_length(t.slack_below, steps, t.name + " slack");
        check_length(t.slack_above, steps, t.name + " slack");
        for (std::size_t k = 0; k < steps; ++k)
        {
            if (!(t.lower[k] <= t.upper[k]) || !std::isfinite(t.lower[k]) || !std::isfinite(t.upper[k]))
            {
                throw std::invalid_argument("coordination problem: empty or unbounded band for " + t.name);
            }
        }
        for (auto const& s : t.sources)
        {
            check_length(s.cap_kw, steps, t.name + " " + s.name + " capacity");
            check_length(s.cop, steps, t.name + " " + s.name + " cop");
            for (std::size_t k = 0; k < steps; ++k)
            {
                if (!(s.cap_kw[k] >= 0.0) || !std::isfinite(s.cap_kw[k]) || !(s.cop[k] > 0.0))
                {
                    throw std::invalid_argument("coordination problem: bad capacity or cop for " + s.name);
                }
            }
        }
    }
    for (auto const& b : batteries)
    {
        if (!(b.a > 0.0 && b.a <= 1.0) || !(b.gain > 0.0) || !(b.efficiency > 0.0 && b.efficiency <= 1.0) ||
            !(b.capacity_kwh > 0.0))
        {
            throw std::invalid_argument("coordination problem: bad battery parameters for " + b.name);
        }
        check_length(b.charge_cap_kw, steps, b.name + " charge cap");
        check_length(b.drive_kw, steps, b.name + " drive");
        check_length(b.min_energy, steps, b.name + " targets");
        check_length(b.unserved_cap, steps, b.name + " unserved cap");
        for (std::size_t k = 0; k < steps; ++k)
        {
            if (b.min_energy[k] > b.capacity_kwh)
            {
                throw std::invalid_argument("coordination problem: target above capacity for " + b.name);
            }
        }
    }
}

lp::Problem to_lp(CoordinationProblem const& problem)
{
    Layout lay;
    return build_lp(problem, lay);
}

std::vector<double> flexible_load(CoordinationProblem const& pb, CoordinationSchedule const& s)
{
    std::vector<double> out(pb.steps, 0.0);
    for (std::size_t t = 0; t < pb.thermal.size(); ++t)
    {
        for (std::size_t j = 0; j < pb.thermal[t].sources.size(); ++j)
        {
            auto const& src = pb.thermal[t].sources[j];
            for (std::size_t k = 0; k < pb.steps; ++k)
            {
                out[k] += s.thermal_inputs[t][j][k] * electric_weight(src.cop[k]);
            }
        }
    }
    for (std::size_t b = 0; b < pb.batteries.size(); ++b)
    {
        for (std::size_t k = 0; k < pb.steps; ++k)
        {
            out[k] += s.charge_kw[b][k];
        }
    }
    return out;
}

CoordinationSchedule solve_coordination(CoordinationProblem const& pb, lp::Options const& options)
{
    Layout lay;
    lp::Problem const lp = build_lp(pb, lay);
    lp::Solution const sol = lp::solve(lp, options);

    CoordinationSchedule s;
    s.variables = lp.num_variables();
    s.constraints = lp.num_rows();
    s.status = sol.status;
    s.iterations = sol.iterations;
    if (sol.x.size() != lp.num_variables())
    {
        return s;
    }
    auto const& x = sol.x;
    std::size_t const K = pb.steps;
    s.peak_kw = value(x, lay.peak);

    s.thermal_inputs.resize(pb.thermal.size());
    s.thermal_states.resize(pb.thermal.size());
    s.slack.resize(pb.thermal.size());
    for (std::size_t t = 0; t < pb.thermal.size(); ++t)
    {
        auto const& st = pb.thermal[t];
        s.thermal_inputs[t].assign(st.sources.size(), std::vector<double>(K));
        s.thermal_states[t].resize(K);
        s.slack[t].resize(K);
        double prev = st.initial;
        for (std::size_t k = 0; k < K; ++k)
        {
            double net = 0.0;
            for (std::size_t j = 0; j < st.sources.size(); ++j)
            {
                double const q = value(x, lay.q[t][j][k]);
                s.thermal_inputs[t][j][k] = q;
                net += st.sources[j].sign * q;
            }
            double const xk = value(x, lay.x[t][k]) - value(x, lay.s_below[t][k]) + value(x, lay.s_above[t][k]);
            s.thermal_states[t][k] = xk;
            s.slack[t][k] = value(x, lay.s_below[t][k]) + value(x, lay.s_above[t][k]);
            double const expect = st.a * prev + st.offset[k] + st.gain * net;
            s.dynamics_residual = std::max(s.dynamics_residual, std::abs(xk - expect));
            prev = xk;
        }
    }

    s.charge_kw.resize(pb.batteries.size());
    s.unserved_kw.resize(pb.batteries.size());
    s.battery_states.resize(pb.batteries.size());
    for (std::size_t b = 0; b < pb.batteries.size(); ++b)
    {
        auto const& bs = pb.batteries[b];
        s.charge_kw[b].resize(K);
        s.unserved_kw[b].resize(K);
        s.battery_states[b].resize(K);
        double prev = bs.initial;
        for (std::size_t k = 0; k < K; ++k)
        {
            double const p = value(x, lay.p[b][k]);
            double const u = value(x, lay.u[b][k]);
            double const e = value(x, lay.e[b][k]);
            s.charge_kw[b][k] = p;
            s.unserved_kw[b][k] = u;
            s.battery_states[b][k] = e;
            double const expect = bs.a * prev + bs.gain * (bs.efficiency * p - bs.drive_kw[k] + u);
            s.dynamics_residual = std::max(s.dynamics_residual, std::abs(e - expect));
            prev = e;
        }
    }

    s.bound_violation = lp.max_violation(x);
    s.electric_kw = flexible_load(pb, s);
    for (std::size_t k = 0; k < K; ++k)
    {
        s.electric_kw[k] += pb.fixed_kw[k];
    }
    return s;
}

CoordinationProblem build_coordination_problem(
    Fleet const& fleet,
    SimWindow const& w,
    std::vector<HouseholdTrace> const& unc,
    CoordinationOptions const& options)
{
    if (unc.size() != fleet.households.size())
    {
        throw std::invalid_argument("build_coordination_problem: one trace per household required");
    }
    std::size_t const w0 = w.warmup_steps;
    std::size_t const K = w.scored_steps();
    double const dt = w.dt_hours;

    bool heating_mode = options.mode == ComfortMode::Heating;
    if (options.mode == ComfortMode::Auto)
    {
        double heat = 0.0;
        double cool = 0.0;
        for (auto const& tr : unc)
        {
            for (std::size_t k = w0; k < w.steps(); ++k)
            {
                (tr.hvac_thermal_kw[k] > 0.0 ? heat : cool) += std::abs(tr.hvac_thermal_kw[k]);
            }
        }
        heating_mode = heat >= cool;
    }

    CoordinationProblem pb;
    pb.steps = K;
    pb.fixed_kw.assign(K, 0.0);
    pb.comfort_penalty = options.comfort_penalty;
    pb.unserved_penalty = options.unserved_penalty;

    double const inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fleet.households.size(); ++i)
    {
        Household const& h = fleet.households[i];
        HouseholdTrace const& tr = unc[i];
        HouseholdInputs const in = household_inputs(fleet, h, w);
        Appliances const& app = h.appliances();
        for (std::size_t k = 0; k < K; ++k)
        {
            pb.fixed_kw[k] += in.misc_kw[w0 + k];
        }

        // Space conditioning.
        bool heated = false;
        bool cooled = false;
        for (std::size_t k = w0; k < w.steps(); ++k)
        {
            heated = heated || tr.hvac_thermal_kw[k] > 0.0;
            cooled = cooled || tr.hvac_thermal_kw[k] < 0.0;
        }
        ThermalStore b;
        b.household = i;
        b.category = LoadCategory::Hvac;
        b.name = "bldg" + std::to_string(i);
        b.a = h.envelope.decay(dt);
        b.gain = (1.0 - b.a) * h.envelope.resistance;
        b.initial = w0 > 0                                   ? tr.indoor_c[w0 - 1]
                        : w.outdoor_c[0] > in.cool_setpoint_c[0] ? in.cool_setpoint_c[0]
                                                                 : in.heat_setpoint_c[0];
        auto const per_step = [&](auto&& f) {
            std::vector<double> v(K);
            for (std::size_t k = 0; k < K; ++k)
            {
                v[k] = f(w0 + k);
            }
            return v;
        };
        b.offset = per_step([&](std::size_t k) { return (1.0 - b.a) * (w.outdoor_c[k] + h.envelope.resistance * in.gain_kw[k]); });
        auto const add_unit = [&](std::string const& name, HeatPumpUnit const& unit, bool heat) {
            ThermalSource src;
            src.name = name;
            src.sign = heat ? 1.0 : -1.0;
            src.cap_kw = per_step([&](std::size_t k) {
                return (heat ? hp_performance(unit, w.outdoor_c[k]) : hp_cooling_performance(unit, w.outdoor_c[k])).capacity_kw;
            });
            src.cop = per_step([&](std::size_t k) {
                return (heat ? hp_performance(unit, w.outdoor_c[k]) : hp_cooling_performance(unit, w.outdoor_c[k])).cop;
            });
            b.sources.push_back(std::move(src));
        };
        auto const add_flat = [&](std::string const& name, double cap, double cop) {
            b.sources.push_back({name, 1.0, std::vector<double>(K, cap), std::vector<double>(K, cop)});
        };
        if (heated)
        {
            switch (app.hvac.heating)
            {
            case HeatingSource::HeatPump:
                add_unit("hp", app.hvac.unit.central, true);
                if (app.hvac.unit.minisplit)
                {
                    add_unit("ms", *app.hvac.unit.minisplit, true);
                }
                if (app.hvac.unit.backup_kw > 0.0)
                {
                    add_flat("backup", app.hvac.unit.backup_kw, 1.0);
                }
                break;
            case HeatingSource::Resistance:
                add_flat("resist", app.hvac.heater_kw, 1.0);
                break;
            case HeatingSource::Fossil:
                add_flat("fossil", app.hvac.heater_kw, inf);
                break;
            case HeatingSource::None:
                break;
            }
        }
        if (cooled && app.hvac.has_cooling)
        {
            add_unit("ac", app.hvac.unit.central, false);
            if (app.hvac.unit.minisplit)
            {
                add_unit("msac", *app.hvac.unit.minisplit, false);
            }
        }
        b.lower.resize(K);
        b.upper.resize(K);
        b.slack_below.assign(K, 0.0);
        b.slack_above.assign(K, 0.0);
        for (std::size_t k = 0; k < K; ++k)
        {
            double const ref = heating_mode ? in.heat_setpoint_c[w0 + k] : in.cool_setpoint_c[w0 + k];
            double const lo = ref - options.comfort_below_c;
            double const hi = ref + options.comfort_above_c;
            double const t_unc = tr.indoor_c[w0 + k];
            // The controlled side relaxes with a penalty, the other side
            // widens to whatever the house does on its own.
            if (heating_mode)
            {
                b.lower[k] = lo;
                b.slack_below[k] = t_unc < lo ? lo - t_unc + kBoundMargin : 0.0;
                b.upper[k] = std::max(hi, t_unc + kBoundMargin);
            }
            else
            {
                b.upper[k] = hi;
                b.slack_above[k] = t_unc > hi ? t_unc - hi + kBoundMargin : 0.0;
                b.lower[k] = std::min(lo, t_unc - kBoundMargin);
            }
        }
        pb.thermal.push_back(std::move(b));

        // Water heating.
        if (app.water.electric)
        {
            WaterHeaterTank const& tank = app.water.tank;
            ThermalStore st;
            st.household = i;
            st.category = LoadCategory::Water;
            st.name = "tank" + std::to_string(i);
            st.a = tank.decay(dt);
            st.gain = (1.0 - st.a) * tank.resistance;
            st.initial = w0 > 0 ? tr.tank_c[w0 - 1] : tank.setpoint_c;
            st.offset = per_step([&](std::size_t k) { return (1.0 - st.a) * (tank.ambient_c - tank.resistance * in.draw_kw[k]); });
            if (tank.hp_electric_kw > 0.0)
            {
                st.sources.push_back({"hpwh", 1.0, std::vector<double>(K, tank.cop * tank.hp_electric_kw),
                                      std::vector<double>(K, tank.cop)});
            }
            if (tank.resistance_kw > 0.0)
            {
                st.sources.push_back({"element", 1.0, std::vector<double>(K, tank.resistance_kw), std::vector<double>(K, 1.0)});
            }
            st.lower.resize(K);
            st.upper.resize(K);
            st.slack_below.assign(K, 0.0);
            st.slack_above.assign(K, 0.0);
            double const lo = tank.setpoint_c - options.tank_below_c;
            double const hi = tank.setpoint_c + options.tank_above_c;
            for (std::size_t k = 0; k < K; ++k)
            {
                double const t_unc = tr.tank_c[w0 + k];
                st.lower[k] = lo;
                st.slack_below[k] = t_unc < lo ? lo - t_unc + kBoundMargin : 0.0;
                st.upper[k] = std::max(hi, t_unc + kBoundMargin);
            }
            pb.thermal.push_back(std::move(st));
        }

        // Vehicles.
        for (std::size_t v = 0; v < in.vehicles.size(); ++v)
        {
            Vehicle const& veh = h.vehicles[in.electric_vehicles[v]];
            VehicleSchedule const& sched = in.vehicles[v];
            auto const& energy = tr.ev_energy_kwh[v];
            BatteryStore bs;
            bs.household = i;
            bs.name = "ev" + std::to_string(i) + "_" + std::to_string(v);
            bs.a = veh.battery.dissipation_per_h < kDissipationSeriesThreshold
                ? 1.0
                : std::exp(-veh.battery.dissipation_per_h * dt);
            bs.gain = ev_input_gain(veh.battery, dt);
            bs.efficiency = veh.battery.efficiency;
            bs.capacity_kwh = veh.battery.capacity_kwh;
            bs.initial = w0 > 0 ? energy[w0 - 1] : veh.battery.capacity_kwh;
            bs.charge_cap_kw = per_step([&](std::size_t k) { return sched.plugged_in[k] ? veh.battery.charge_kw : 0.0; });
            bs.drive_kw = per_step([&](std::size_t k) { return sched.drive_kw[k]; });
            bs.unserved_cap = per_step([&](std::size_t k) {
                return energy[k] <= 0.0 && sched.drive_kw[k] > 0.0 ? sched.drive_kw[k] : 0.0;
            });
            bs.min_energy.assign(K, 0.0);
            auto const target = [&](std::size_t k) { return std::max(0.0, energy[w0 + k] - kBoundMargin); };
            for (std::size_t d : sched.departures)
            {
                if (d > w0)
                {
                    bs.min_energy[d - w0 - 1] = target(d - w0 - 1);
                }
            }
            bs.min_energy[K - 1] = std::max(bs.min_energy[K - 1], target(K - 1));
            pb.batteries.push_back(std::move(bs));
        }
    }
    return pb;
}

CoordinationResult coordinate_fleet(
    Fleet const& fleet,
    SimWindow const& w,
    CoordinationOptions const& options)
{
    CoordinationResult res;
    std::vector<HouseholdTrace> traces;
    traces.reserve(fleet.households.size());
    for (auto const& h : fleet.households)
    {
        traces.push_back(simulate_household(fleet, h, w));
    }
    res.uncoordinated = aggregate(traces, w, fleet.scale_factor);
    res.coordinated = res.uncoordinated;
    if (fleet.households.empty())
    {
        return res;
    }

    CoordinationProblem pb = build_coordination_problem(fleet, w, traces, options);
    double unc_max = 0.0;
    for (double v : res.uncoordinated.total_kw)
    {
        unc_max = std::max(unc_max, v);
    }
    pb.peak_cap = unc_max / fleet.scale_factor * (1.0 + 1e-9) + 1e-9;

    if (options.on_program)
    {
        options.on_program(to_lp(pb));
    }
    res.schedule = solve_coordination(pb, options.lp);
    auto const& s = res.schedule;
    if (s.status != lp::Status::Optimal && s.status != lp::Status::Stalled)
    {
        res.fell_back = true;
        res.notes.push_back(std::string("solver status ") + lp::to_string(s.status) + "; uncoordinated schedule kept");
        return res;
    }
    if (s.status == lp::Status::Stalled)
    {
        res.notes.push_back("solver stalled before full tolerance");
    }

    std::vector<HouseholdTrace> coord = traces;
    std::size_t const w0 = w.warmup_steps;
    for (auto& tr : coord)
    {
        for (std::size_t k = w0; k < w.steps(); ++k)
        {
            tr.hvac_kw[k] = 0.0;
            tr.water_kw[k] = 0.0;
            tr.ev_kw[k] = 0.0;
        }
        tr.backup_kwh = 0.0;
    }
    std::vector<bool> relaxed(fleet.households.size(), false);
    for (std::size_t t = 0; t < pb.thermal.size(); ++t)
    {
        auto const& st = pb.thermal[t];
        auto& tr = coord[st.household];
        auto& target = st.category == LoadCategory::Hvac ? tr.hvac_kw : tr.water_kw;
        for (std::size_t j = 0; j < st.sources.size(); ++j)
        {
            for (std::size_t k = 0; k < pb.steps; ++k)
            {
                double const q = s.thermal_inputs[t][j][k];
                target[w0 + k] += q * electric_weight(st.sources[j].cop[k]);
                if (st.sources[j].name == "backup")
                {
                    tr.backup_kwh += q * w.dt_hours;
                }
            }
        }
        for (std::size_t k = 0; k < pb.steps; ++k)
        {
            if (st.category == LoadCategory::Hvac)
            {
                tr.indoor_c[w0 + k] = s.thermal_states[t][k];
            }
            else
            {
                tr.tank_c[w0 + k] = s.thermal_states[t][k];
            }
            if (s.slack[t][k] > kRelaxedTolerance)
            {
                relaxed[st.household] = true;
            }
        }
    }
    for (std::size_t b = 0; b < pb.batteries.size(); ++b)
    {
        auto& tr = coord[pb.batteries[b].household];
        for (std::size_t k = 0; k < pb.steps; ++k)
        {
            tr.ev_kw[w0 + k] += s.charge_kw[b][k];
        }
    }
    res.relaxed_households = static_cast<std::size_t>(std::count(relaxed.begin(), relaxed.end(), true));
    if (res.relaxed_households > 0)
    {
        res.notes.push_back(std::to_string(res.relaxed_households) + " households with relaxed comfort bands");
    }

    AggregateProfile opt = aggregate(coord, w, fleet.scale_factor);
    if (peak99(opt.total_kw) > peak99(res.uncoordinated.total_kw))
    {
        res.fell_back = true;
        res.notes.push_back("optimized peak99 above uncoordinated; uncoordinated schedule kept");
        return res;
    }
    res.coordinated = std::move(opt);
    return res;
}

std::string strategy_label(unsigned mask)
{
    if (mask == 0)
    {
        return "none";
    }
    std::string out;
    auto const add = [&](char const* s) {
        if (!out.empty())
        {
            out += "+";
        }
        out += s;
    };
    if (mask & kEnvelope)
    {
        add("envelope");
    }
    if (mask & kGroundSource)
    {
        add("gshp");
    }
    if (mask & kCoordinate)
    {
        add("coordinate");
    }
    return out;
}

std::vector<StrategyReduction> dsm_cost_reduction_report(std::map<unsigned, double> const& costs)
{
    auto const base = costs.find(0u);
    if (base == costs.end())
    {
        throw std::invalid_argument("dsm_cost_reduction_report: baseline (no strategy) cost missing");
    }
    std::vector<StrategyReduction> out;
    for (auto const& [mask, cost] : costs)
    {
        StrategyReduction r;
        r.mask = mask;
        r.label = strategy_label(mask);
        r.total_cost = cost;
        r.reduction_pct = base->second > 0.0 ? 100.0 * (base->second - cost) / base->second : 0.0;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace gridimpact
