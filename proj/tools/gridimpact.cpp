#include "gridimpact/io.hpp"
#include "gridimpact/run.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace gi = gridimpact;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Grid reinforcement requirement and cost of residential electrification"};
    app.set_version_flag("--version", GRIDIMPACT_VERSION);

    std::string config_path;
    std::optional<std::string> scenario, sizing, hp_profile, adoption_sweep, sweep_bau, sweep_future, discount_sweep, out;
    std::vector<std::string> dsm;
    bool night_setback = false, dump_lp = false, dsm_report = false;
    std::optional<double> adoption, headroom_bau, headroom_future, dt;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::optional<std::size_t> monte_carlo, sample_size;

    app.add_option("--config", config_path, "run configuration (JSON)")->required();
    app.add_option("--scenario", scenario, "scenario")->check(CLI::IsMember({"bau", "all-electric", "both"}));
    app.add_option("--dsm", dsm, "demand-side strategies")
        ->check(CLI::IsMember({"envelope", "gshp", "coordinate"}))
        ->expected(1, 3);
    app.add_option("--sizing", sizing, "heat pump sizing rule")->check(CLI::IsMember({"max-of-both", "cooling-only"}));
    app.add_flag("--night-setback", night_setback, "randomized overnight heating setback");
    app.add_option("--hp-profile", hp_profile, "heat pump performance profile")->check(CLI::IsMember({"cchp", "today"}));
    auto* adopt = app.add_option("--adoption", adoption, "electrified fraction of households");
    auto* adopt_sweep = app.add_option("--adoption-sweep", adoption_sweep, "adoption grid A:B:STEP");
    adopt->excludes(adopt_sweep);
    app.add_option("--headroom-bau", headroom_bau, "today's headroom, overriding each county's value");
    app.add_option("--headroom-future", headroom_future, "target headroom of the electrified grid");
    app.add_option("--headroom-sweep-bau", sweep_bau, "bau headroom grid A:B:STEP");
    app.add_option("--headroom-sweep-future", sweep_future, "future headroom grid A:B:STEP");
    app.add_option("--discount-sweep", discount_sweep, "discount rate grid A:B:STEP");
    app.add_flag("--dsm-report", dsm_report, "evaluate every subset of the --dsm strategies");
    app.add_option("--monte-carlo", monte_carlo, "Monte Carlo runs of the peak per county");
    app.add_option("--sample-size", sample_size, "households synthesized per county");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--dt", dt, "time step, hours");
    app.add_option("--out", out, "output directory");
    app.add_option("--jobs", jobs, "worker threads (default: available cores)");
    app.add_flag("--dump-lp", dump_lp, "write coordination programs as MPS under OUT/lp");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    gi::RunConfig config;
    try
    {
        config = gi::load_run_config(config_path);
        if (scenario)
        {
            config.scenario = gi::parse_scenario_selection(*scenario);
        }
        if (!dsm.empty())
        {
            config.dsm = 0;
            for (auto const& d : dsm)
            {
                config.dsm |= gi::parse_dsm_flag(d);
            }
        }
        if (sizing)
        {
            config.sizing = gi::parse_sizing_rule(*sizing);
        }
        config.night_setback = config.night_setback || night_setback;
        config.dump_lp = config.dump_lp || dump_lp;
        config.dsm_report = config.dsm_report || dsm_report;
        if (hp_profile)
        {
            config.hp_profile = gi::parse_hp_profile(*hp_profile);
        }
        if (adoption)
        {
            config.adoption = *adoption;
            config.adoption_sweep.clear();
        }
        if (adoption_sweep)
        {
            config.adoption_sweep = gi::parse_grid(*adoption_sweep);
        }
        if (headroom_bau)
        {
            config.headroom_bau = *headroom_bau;
        }
        if (headroom_future)
        {
            config.headroom_future = *headroom_future;
        }
        if (sweep_bau)
        {
            config.headroom_sweep_bau = gi::parse_grid(*sweep_bau);
        }
        if (sweep_future)
        {
            config.headroom_sweep_future = gi::parse_grid(*sweep_future);
        }
        if (discount_sweep)
        {
            config.discount_sweep = gi::parse_grid(*discount_sweep);
        }
        if (monte_carlo)
        {
            config.monte_carlo_runs = *monte_carlo;
        }
        if (sample_size)
        {
            config.sample_size = *sample_size;
        }
        if (seed)
        {
            config.seed = *seed;
        }
        if (dt)
        {
            config.dt_hours = *dt;
        }
        if (out)
        {
            config.out_dir = *out;
        }
        if (jobs)
        {
            config.jobs = *jobs;
        }
        config.validate();
    }
    catch (std::exception const& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try
    {
        gi::RunReport const report = gi::run(config);
        for (auto const& c : report.counties)
        {
            if (!c.ok)
            {
                std::cerr << "county " << c.source << " failed: " << c.error << "\n";
            }
        }
        std::cout << "wrote " << report.outputs.size() << " files to " << config.out_dir.string() << "\n";
        return report.failures() == report.counties.size() ? kExitFailure : kExitOk;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
