#include "gridimpact/dsm.hpp"
#include "gridimpact/io.hpp"
#include "small_instance.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gridimpact;
using testing_support::cold_county;
using testing_support::data_dir;

namespace
{

SimWindow cold_window(bool heating)
{
    static WeatherSeries const w = load_weather(data_dir() / "weather" / "cold.csv");
    auto weeks = select_peak_weeks(w);
    return make_window(w, heating ? weeks.heating : weeks.cooling, 0.25);
}

Fleet fleet(Scenario s, std::size_t n, std::uint64_t seed = 21)
{
    SynthesisOptions o;
    o.sample_size = n;
    return synthesize_fleet(cold_county(), s, seed, o);
}

double max_of(std::vector<double> const& v)
{
    return *std::max_element(v.begin(), v.end());
}

} // namespace

TEST(Envelope, ScalesResistanceOnly)
{
    auto f = fleet(Scenario::AllElectric, 10);
    f.households[0].envelope.resistance = 4.0;
    auto g = apply_envelope_upgrade(f);
    EXPECT_DOUBLE_EQ(g.households[0].envelope.resistance, 5.0);
    EXPECT_DOUBLE_EQ(apply_envelope_upgrade(g).households[0].envelope.resistance, 4.0 * 1.5625);
    for (std::size_t i = 0; i < f.households.size(); ++i)
    {
        EXPECT_DOUBLE_EQ(g.households[i].envelope.capacitance, f.households[i].envelope.capacitance);
        EXPECT_TRUE(g.households[i].electrified_set == f.households[i].electrified_set);
        auto const d0 = design_loads(f.households[i].envelope, 20, 24, cold_county().design, 0);
        auto const d1 = design_loads(g.households[i].envelope, 20, 24, cold_county().design, 0);
        EXPECT_LE(d1.heating_kw, d0.heating_kw);
    }
}

TEST(Envelope, LowersColdPeak)
{
    auto f = fleet(Scenario::AllElectric, 60);
    auto w = cold_window(true);
    EXPECT_LT(peak99(simulate_week(apply_envelope_upgrade(f), w).total_kw), peak99(simulate_week(f, w).total_kw));
}

TEST(GroundSource, ConstantCapacityAndCop)
{
    auto f = fleet(Scenario::AllElectric, 20);
    auto g = apply_gshp(f);
    for (std::size_t i = 0; i < f.households.size(); ++i)
    {
        auto const& air = f.households[i].electrified_set.hvac.unit.central;
        auto const& ground = g.households[i].electrified_set.hvac.unit.central;
        double const rated = hp_performance(air, kHeatingRatingC).cop;
        EXPECT_NEAR(hp_performance(ground, -20).cop, 1.5 * rated, 1e-12);
        EXPECT_NEAR(hp_performance(ground, 5).cop, 1.5 * rated, 1e-12);
        EXPECT_NEAR(hp_performance(ground, -20).capacity_kw, air.nameplate_cooling_kw, 1e-12);
        EXPECT_NEAR(hp_cooling_performance(ground, 35).cop,
                    1.5 * hp_cooling_performance(air, kCoolingRatingC).cop, 1e-12);
        EXPECT_TRUE(g.households[i].today == f.households[i].today);
    }
}

TEST(GroundSource, OneThirdLessElectricityPerHeat)
{
    HeatPumpUnit air{PerformanceCurve({{-20, 5, 1.8}, {8.33, 10, 3.0}}), PerformanceCurve::constant(10, 3.2), 10};
    Fleet f;
    Household h;
    h.electrified = true;
    h.electrified_set.hvac.heating = HeatingSource::HeatPump;
    h.electrified_set.hvac.unit.central = air;
    f.households.push_back(h);
    auto g = apply_gshp(f);
    auto const& unit = g.households[0].electrified_set.hvac.unit;
    EXPECT_NEAR(hp_performance(unit.central, 0).cop, 4.5, 1e-12);
    double const before = dispatch_heating(f.households[0].electrified_set.hvac.unit, 6, kHeatingRatingC).electric_kw;
    double const after = dispatch_heating(unit, 6, kHeatingRatingC).electric_kw;
    EXPECT_NEAR(after / before, 2.0 / 3.0, 1e-12);
}

TEST(GroundSource, LessBackupEnergyOnColdFixture)
{
    auto f = fleet(Scenario::AllElectric, 60);
    auto w = cold_window(true);
    double const air = simulate_week(f, w).diagnostics.backup_kwh;
    double const ground = simulate_week(apply_gshp(f), w).diagnostics.backup_kwh;
    EXPECT_GT(air, 0.0);
    EXPECT_LT(ground, air);
}

TEST(Coordination, SmallInstanceMatchesBruteForce)
{
    auto pb = testing_support::small_coordination_problem();
    auto s = solve_coordination(pb);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    double const bf = testing_support::brute_force_peak(pb);
    double const res = testing_support::discretization_resolution(pb);
    EXPECT_LE(s.peak_kw, bf + 1e-6);
    EXPECT_LE(bf - s.peak_kw, res);
    EXPECT_LT(s.dynamics_residual, 1e-6);
    EXPECT_LT(s.bound_violation, 1e-6);
    for (std::size_t k = 0; k < pb.steps; ++k)
    {
        EXPECT_LE(s.electric_kw[k], s.peak_kw + 1e-6);
    }
}

TEST(Coordination, EvOnlyFleetIsFlat)
{
    CoordinationProblem pb;
    std::size_t const K = 24;
    pb.steps = K;
    pb.fixed_kw.assign(K, 0.0);
    double needed = 0.0;
    for (int v = 0; v < 3; ++v)
    {
        BatteryStore b;
        b.name = "ev";
        b.gain = 0.5;
        b.efficiency = 0.9;
        b.capacity_kwh = 80;
        b.initial = 20 + 5 * v;
        b.charge_cap_kw.assign(K, 11.0);
        b.drive_kw.assign(K, 0.0);
        b.min_energy.assign(K, 0.0);
        b.min_energy[K - 1] = 70;
        b.unserved_cap.assign(K, 0.0);
        needed += (70 - b.initial) / (0.9 * 0.5);
        pb.batteries.push_back(b);
    }
    auto s = solve_coordination(pb);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    double const flat = needed / K;
    EXPECT_NEAR(s.peak_kw, flat, 1e-6 * flat);
    for (double e : s.electric_kw)
    {
        EXPECT_NEAR(e, flat, 1e-5 * flat);
    }
}

TEST(Coordination, ZeroWidthBandReproducesTracking)
{
    BuildingEnvelope env{4, 5};
    std::size_t const K = 16;
    double const dt = 0.5, theta = -3, gain = 0.4;
    double const a = env.decay(dt);
    ThermalStore st;
    st.name = "building";
    st.a = a;
    st.gain = (1 - a) * env.resistance;
    st.initial = 20;
    st.offset.assign(K, (1 - a) * (theta + env.resistance * gain));
    st.lower.assign(K, 20);
    st.upper.assign(K, 20);
    st.slack_below.assign(K, 0);
    st.slack_above.assign(K, 0);
    st.sources.push_back({"hp", 1.0, std::vector<double>(K, 10.0), std::vector<double>(K, 2.5)});
    CoordinationProblem pb;
    pb.steps = K;
    pb.fixed_kw.assign(K, 1.0);
    pb.thermal.push_back(st);
    auto s = solve_coordination(pb);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    double const q = ideal_thermal_power(env, 20, 20, theta, gain, dt);
    for (std::size_t k = 0; k < K; ++k)
    {
        EXPECT_NEAR(s.thermal_inputs[0][0][k], q, 1e-6);
    }
}

TEST(Coordination, RejectsMalformedProblems)
{
    auto pb = testing_support::small_coordination_problem();
    pb.thermal[0].lower[2] = 30;
    EXPECT_THROW(solve_coordination(pb), std::invalid_argument);
    pb = testing_support::small_coordination_problem();
    pb.thermal[0].a = 1.0;
    EXPECT_THROW(solve_coordination(pb), std::invalid_argument);
    pb = testing_support::small_coordination_problem();
    pb.batteries[0].min_energy[0] = 100;
    EXPECT_THROW(solve_coordination(pb), std::invalid_argument);
}

TEST(Coordination, TwentyHomeFixtureLowersPeak)
{
    auto f = fleet(Scenario::AllElectric, 20);
    auto w = cold_window(true);
    auto r = coordinate_fleet(f, w);
    ASSERT_FALSE(r.fell_back);
    ASSERT_TRUE(r.schedule.status == lp::Status::Optimal || r.schedule.status == lp::Status::Stalled);
    EXPECT_LT(r.schedule.dynamics_residual, 1e-6);
    EXPECT_LT(r.schedule.bound_violation, 1e-6);
    EXPECT_LE(peak99(r.coordinated.total_kw), peak99(r.uncoordinated.total_kw));
    EXPECT_LT(max_of(r.coordinated.total_kw), max_of(r.uncoordinated.total_kw));
    for (std::size_t k = 0; k < r.coordinated.size(); ++k)
    {
        EXPECT_NEAR(r.coordinated.total_kw[k],
                    r.coordinated.misc_kw[k] + r.coordinated.water_kw[k] + r.coordinated.ev_kw[k] +
                        r.coordinated.hvac_kw[k],
                    1e-6 * std::max(1.0, r.coordinated.total_kw[k]));
    }
}

TEST(Coordination, WindowWithoutWarmup)
{
    static WeatherSeries const weather = load_weather(data_dir() / "weather" / "cold.csv");
    WeekWindow week;
    week.warmup_begin = 0;
    week.scored_begin = 0;
    week.scored_end = 168;
    auto w = make_window(weather, week, 0.25);
    ASSERT_EQ(w.warmup_steps, 0u);
    auto r = coordinate_fleet(fleet(Scenario::AllElectric, 6), w);
    ASSERT_FALSE(r.fell_back);
    EXPECT_LT(r.schedule.dynamics_residual, 1e-6);
    EXPECT_LE(peak99(r.coordinated.total_kw), peak99(r.uncoordinated.total_kw) + 1e-9);
}

TEST(Coordination, DeterministicObjective)
{
    auto f = fleet(Scenario::AllElectric, 6);
    auto w = cold_window(false);
    auto a = coordinate_fleet(f, w);
    auto b = coordinate_fleet(f, w);
    EXPECT_EQ(a.schedule.peak_kw, b.schedule.peak_kw);
    EXPECT_EQ(a.coordinated.total_kw, b.coordinated.total_kw);
}

TEST(Report, ReductionsRelativeToBaseline)
{
    auto r = dsm_cost_reduction_report({{0u, 200.0}, {kEnvelope, 150.0}, {kEnvelope | kCoordinate, 50.0}});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_DOUBLE_EQ(r[0].reduction_pct, 0.0);
    EXPECT_EQ(r[0].label, "none");
    EXPECT_DOUBLE_EQ(r[1].reduction_pct, 25.0);
    EXPECT_EQ(r[2].label, "envelope+coordinate");
    EXPECT_DOUBLE_EQ(r[2].reduction_pct, 75.0);
    EXPECT_THROW(dsm_cost_reduction_report({{kEnvelope, 1.0}}), std::invalid_argument);
}
