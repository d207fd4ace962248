#include "gridimpact/io.hpp"
#include "gridimpact/run.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace gridimpact;
namespace fs = std::filesystem;
using testing_support::data_dir;

namespace
{

fs::path scratch(std::string const& name)
{
    fs::path p = fs::temp_directory_path() / ("gridimpact_run_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

nlohmann::json base_config(fs::path const& out)
{
    return {
        {"schema_version", 1},
        {"counties", {(data_dir() / "counties" / "cold.json").string(), (data_dir() / "counties" / "hot_humid.json").string()}},
        {"prices", {{"capital_per_kW", 948.9324912611563}, {"recurring_per_kW_year", 0.8513468260648989}}},
        {"sample_size", 12},
        {"seed", 5},
        {"jobs", 2},
        {"out", out.string()},
    };
}

fs::path write_config(fs::path const& dir, nlohmann::json const& j)
{
    fs::path p = dir / "run.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(std::string const& args)
{
    std::string const cmd = std::string(GRIDIMPACT_CLI) + " " + args + " > /dev/null 2>&1";
    int const status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Grid, ParseInclusive)
{
    auto g = parse_grid("0:1:0.1");
    ASSERT_EQ(g.size(), 11u);
    EXPECT_DOUBLE_EQ(g.front(), 0.0);
    EXPECT_DOUBLE_EQ(g.back(), 1.0);
    EXPECT_NEAR(g[3], 0.3, 1e-12);
    EXPECT_THROW(parse_grid("1:0:0.1"), ConfigError);
    EXPECT_THROW(parse_grid("0:1"), ConfigError);
    EXPECT_THROW(parse_grid("0:1:0"), ConfigError);
}

TEST(Parse, Flags)
{
    EXPECT_EQ(parse_scenario_selection("all-electric"), ScenarioSelection::AllElectric);
    EXPECT_THROW(parse_scenario_selection("future"), ConfigError);
    EXPECT_EQ(parse_hp_profile("today"), HeatPumpProfile::Today);
    EXPECT_EQ(parse_dsm_flag("coordinate"), 4u);
    EXPECT_THROW(parse_dsm_flag("solar"), ConfigError);
}

TEST(Headroom, Interpolation)
{
    EXPECT_DOUBLE_EQ(adoption_headroom(0.0, 0.3, 0.2), 0.3);
    EXPECT_DOUBLE_EQ(adoption_headroom(1.0, 0.3, 0.2), 0.2);
    EXPECT_DOUBLE_EQ(reinforcement_kw(100, 100, 0.2, 0.2), 0.0);
    EXPECT_NEAR(reinforcement_kw(10e3, 30e3, 0.2, 0.2), 24e3, 1e-9);
}

TEST(Config, LoadsShippedConfig)
{
    auto c = load_run_config(data_dir() / "run.json");
    EXPECT_EQ(c.counties.size(), 2u);
    EXPECT_EQ(c.scenario, ScenarioSelection::Both);
    EXPECT_EQ(c.seed, 20240601u);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsBadInput)
{
    auto dir = scratch("bad");
    auto j = base_config(dir / "out");
    j["colour"] = "blue";
    EXPECT_THROW(load_run_config(write_config(dir, j)), ConfigError);

    j = base_config(dir / "out");
    j.erase("prices");
    EXPECT_THROW(load_run_config(write_config(dir, j)), ConfigError);

    j = base_config(dir / "out");
    j["schema_version"] = 2;
    EXPECT_THROW(load_run_config(write_config(dir, j)), ConfigError);

    j = base_config(dir / "out");
    j["scenario"] = "bau";
    j["dsm"] = {"coordinate"};
    EXPECT_THROW(load_run_config(write_config(dir, j)).validate(), ConfigError);

    j = base_config(dir / "out");
    j["counties"] = {(dir / "nowhere.json").string()};
    EXPECT_THROW(load_run_config(write_config(dir, j)).validate(), ConfigError);

    j = base_config(dir / "out");
    j["adoption"] = 1.5;
    EXPECT_THROW(load_run_config(write_config(dir, j)).validate(), ConfigError);

    j = base_config(dir / "out");
    j["dt_hours"] = 0.33;
    EXPECT_THROW(load_run_config(write_config(dir, j)).validate(), ConfigError);

    EXPECT_THROW(load_run_config(dir / "absent.json"), ConfigError);
}

TEST(Config, HashIgnoresExecutionFields)
{
    auto c = load_run_config(data_dir() / "run.json");
    auto d = c;
    d.jobs = c.jobs + 3;
    d.out_dir = "/elsewhere";
    EXPECT_EQ(config_hash(c), config_hash(d));
    d.seed += 1;
    EXPECT_NE(config_hash(c), config_hash(d));
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Run, WritesBundleAndIsDeterministic)
{
    auto dir = scratch("bundle");
    auto cfg = base_config(dir / "a");
    cfg["discount_sweep"] = "0:0.05:0.025";
    cfg["headroom"] = {{"sweep_bau", "0.1:0.3:0.1"}, {"sweep_future", "0.1:0.3:0.1"}};
    auto a = load_run_config(write_config(dir, cfg));
    auto ra = run(a);
    EXPECT_EQ(ra.failures(), 0u);
    for (auto const* f : {"reinforcement.csv", "costs.csv", "diagnostics.csv", "manifest.json",
                          "headroom_sweep.csv", "discount_sweep.csv"})
    {
        EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
    }
    EXPECT_TRUE(fs::exists(dir / "a" / "profiles" / "cold_all-electric_heating.csv"));

    auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    EXPECT_EQ(manifest["schema_version"], kManifestSchemaVersion);
    EXPECT_EQ(manifest["seed"], 5);
    EXPECT_EQ(manifest["config_hash"], config_hash(a));

    auto b = a;
    b.out_dir = dir / "b";
    b.jobs = 1;
    run(b);
    for (auto const& entry : fs::recursive_directory_iterator(dir / "a"))
    {
        if (entry.path().extension() == ".csv")
        {
            auto rel = fs::relative(entry.path(), dir / "a");
            EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / rel)) << rel;
        }
    }

    auto table = read_csv(dir / "a" / "reinforcement.csv");
    auto const id = table.column("county_id");
    auto const g = table.column("G_kW");
    bool found = false;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
    {
        if (table.rows[r][id] == "cold")
        {
            found = true;
            EXPECT_GT(table.number(r, g), 0.0);
        }
    }
    EXPECT_TRUE(found);
}

TEST(Run, FailingCountyIsIsolated)
{
    auto dir = scratch("isolated");
    fs::copy(data_dir(), dir / "data", fs::copy_options::recursive);
    std::ofstream(dir / "data" / "weather" / "hot_humid.csv") << "timestamp,outdoor_temp_C\n2021-01-01 00:00,1\n";
    auto cfg = base_config(dir / "out");
    cfg["counties"] = {(dir / "data" / "counties" / "cold.json").string(),
                       (dir / "data" / "counties" / "hot_humid.json").string()};
    auto report = run(load_run_config(write_config(dir, cfg)));
    EXPECT_EQ(report.failures(), 1u);
    auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    EXPECT_NE(manifest.dump().find("failed"), std::string::npos);
}

TEST(Cli, ExitCodes)
{
    auto dir = scratch("cli");
    auto cfg_path = write_config(dir, base_config(dir / "out"));
    EXPECT_EQ(run_cli("--config " + cfg_path.string() + " --scenario bau --sample-size 8"), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "diagnostics.csv"));
    EXPECT_EQ(run_cli("--config " + cfg_path.string() + " --scenario nonsense"), 2);
    EXPECT_EQ(run_cli("--config " + (dir / "absent.json").string()), 2);
    EXPECT_EQ(run_cli("--config " + cfg_path.string() + " --scenario bau --dsm gshp"), 2);
    EXPECT_EQ(run_cli("--config " + cfg_path.string() + " --adoption 0.5 --adoption-sweep 0:1:0.5"), 2);
    EXPECT_EQ(run_cli("--version"), 0);

    fs::copy(data_dir(), dir / "data", fs::copy_options::recursive);
    std::ofstream(dir / "data" / "weather" / "cold.csv") << "timestamp,outdoor_temp_C\n";
    auto broken = base_config(dir / "out2");
    broken["counties"] = {(dir / "data" / "counties" / "cold.json").string()};
    auto broken_path = dir / "broken.json";
    std::ofstream(broken_path) << broken.dump();
    EXPECT_EQ(run_cli("--config " + broken_path.string()), 1);
}
