#pragma once

#include "gridimpact/economics.hpp"
#include "gridimpact/fleet.hpp"
#include "gridimpact/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridimpact
{

inline constexpr int kRunConfigSchemaVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

/// Invalid or inconsistent run configuration (exit code 2).
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class ScenarioSelection
{
    Bau,
    AllElectric,
    Both,
};

ScenarioSelection parse_scenario_selection(std::string_view s);
std::string_view to_string(ScenarioSelection s);
HeatPumpProfile parse_hp_profile(std::string_view s);
std::string_view to_string(HeatPumpProfile p);
/// "envelope", "gshp" or "coordinate" to its strategy bit.
unsigned parse_dsm_flag(std::string_view s);

/// Inclusive grid start, start + step, ... up to stop (within 1e-9 of a step).
std::vector<double> parse_grid(std::string_view spec);
std::vector<double> make_grid(double start, double stop, double step);

struct RunConfig
{
    std::vector<std::filesystem::path> counties;
    std::map<std::string, std::filesystem::path> weather; ///< per-county overrides
    ScenarioSelection scenario = ScenarioSelection::Both;
    unsigned dsm = 0;                 ///< StrategyBits
    bool dsm_report = false;          ///< also evaluate every subset of `dsm`
    SizingRule sizing = SizingRule::MaxOfBoth;
    bool night_setback = false;
    HeatPumpProfile hp_profile = HeatPumpProfile::ColdClimate;
    double adoption = 1.0;
    std::vector<double> adoption_sweep;
    std::optional<double> headroom_bau; ///< overrides every county's drawn value
    double headroom_future = kFutureHeadroom;
    std::vector<double> headroom_sweep_bau;
    std::vector<double> headroom_sweep_future;
    std::vector<double> discount_sweep;
    PriceModel prices;
    std::size_t sample_size = 1000;
    std::size_t monte_carlo_runs = 0;
    std::uint64_t seed = 1;
    double dt_hours = 0.25;
    unsigned jobs = 1; ///< a config file without "jobs" uses every available core
    std::filesystem::path out_dir = "out";
    bool dump_lp = false;

    /// Throws ConfigError.
    void validate() const;
    /// Canonical JSON of every field (paths as given).
    std::string to_json() const;
};

/// Read a run configuration file. Relative paths resolve against the file's
/// directory. Throws ConfigError.
RunConfig load_run_config(std::filesystem::path const& path);

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

/// Hash of the canonical configuration without execution-only fields
/// (jobs, output directory).
std::string config_hash(RunConfig const& config);

struct ScenarioPeak
{
    CountyPeak peak;
    std::vector<std::string> notes;
};

struct CountyOutcome
{
    std::string county_id;
    std::string source;
    bool ok = false;
    std::string error;
    double true_household_count = 0.0;
    std::optional<ScenarioPeak> bau;
    std::optional<ScenarioPeak> future;
    double headroom_bau = 0.0;
    double headroom_future = 0.0;
    double g_kw = 0.0;
    std::vector<std::pair<double, double>> adoption; ///< (fraction, G kW)
    std::map<unsigned, double> dsm_g_kw;             ///< strategy mask -> G kW
    std::optional<MonteCarloResult> monte_carlo;
};

/// Everything a run computes for one county. Throws on bad inputs.
CountyOutcome run_county(RunConfig const& config, std::filesystem::path const& county_path, unsigned jobs);

struct RunReport
{
    std::vector<CountyOutcome> counties;
    std::vector<std::filesystem::path> outputs;

    std::size_t failures() const;
};

/// Run every county (independent counties in parallel), then write the
/// report bundle to `config.out_dir`.
RunReport run(RunConfig const& config);

/// G under headroom overrides from the two peak99 values.
double reinforcement_kw(double bau_peak99, double future_peak99, double headroom_bau, double headroom_future);

/// Future headroom at adoption fraction f, linear between today's headroom
/// at f = 0 and the target at f = 1.
double adoption_headroom(double fraction, double headroom_bau, double headroom_future);

} // namespace gridimpact
