#include "gridimpact/run.hpp"

#include "gridimpact/dsm.hpp"
#include "gridimpact/io.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#ifndef GRIDIMPACT_VERSION
#define GRIDIMPACT_VERSION "0.0.0"
#endif

namespace gridimpact
{

namespace fs = std::filesystem;
using nlohmann::json;

ScenarioSelection parse_scenario_selection(std::string_view s)
{
    if (s == "bau")
    {
        return ScenarioSelection::Bau;
    }
    if (s == "all-electric")
    {
        return ScenarioSelection::AllElectric;
    }
    if (s == "both")
    {
        return ScenarioSelection::Both;
    }
    throw ConfigError("unknown scenario '" + std::string(s) + "' (bau, all-electric, both)");
}

std::string_view to_string(ScenarioSelection s)
{
    switch (s)
    {
    case ScenarioSelection::Bau: return "bau";
    case ScenarioSelection::AllElectric: return "all-electric";
    case ScenarioSelection::Both: return "both";
    }
    return "both";
}

HeatPumpProfile parse_hp_profile(std::string_view s)
{
    if (s == "cchp")
    {
        return HeatPumpProfile::ColdClimate;
    }
    if (s == "today")
    {
        return HeatPumpProfile::Today;
    }
    throw ConfigError("unknown heat pump profile '" + std::string(s) + "' (cchp, today)");
}

std::string_view to_string(HeatPumpProfile p)
{
    return p == HeatPumpProfile::ColdClimate ? "cchp" : "today";
}

unsigned parse_dsm_flag(std::string_view s)
{
    if (s == "envelope")
    {
        return kEnvelope;
    }
    if (s == "gshp")
    {
        return kGroundSource;
    }
    if (s == "coordinate")
    {
        return kCoordinate;
    }
    throw ConfigError("unknown DSM strategy '" + std::string(s) + "' (envelope, gshp, coordinate)");
}

std::vector<double> make_grid(double start, double stop, double step)
{
    if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0) || stop < start)
    {
        throw ConfigError("grid needs start <= stop and step > 0");
    }
    auto const n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    if (n > 100000)
    {
        throw ConfigError("grid has too many points");
    }
    std::vector<double> g;
    for (std::size_t k = 0; k <= n; ++k)
    {
        g.push_back(std::min(stop, start + static_cast<double>(k) * step));
    }
    return g;
}

std::vector<double> parse_grid(std::string_view spec)
{
    double v[3];
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i)
    {
        auto const colon = spec.find(':', pos);
        if ((i < 2) == (colon == std::string_view::npos))
        {
            throw ConfigError("grid '" + std::string(spec) + "' is not START:STOP:STEP");
        }
        std::string const part(spec.substr(pos, colon - pos));
        try
        {
            std::size_t used = 0;
            v[i] = std::stod(part, &used);
            if (used != part.size())
            {
                throw std::invalid_argument(part);
            }
        }
        catch (std::exception const&)
        {
            throw ConfigError("grid '" + std::string(spec) + "': '" + part + "' is not a number");
        }
        pos = colon + 1;
    }
    return make_grid(v[0], v[1], v[2]);
}

namespace
{

void check_fraction(double v, std::string const& what)
{
    if (!(v >= 0.0 && v <= 1.0))
    {
        throw ConfigError(what + " must be within [0, 1]");
    }
}

void check_fractions(std::vector<double> const& g, std::string const& what)
{
    for (double v : g)
    {
        check_fraction(v, what);
    }
}

json path_list(std::vector<fs::path> const& paths)
{
    json a = json::array();
    for (auto const& p : paths)
    {
        a.push_back(p.generic_string());
    }
    return a;
}

} // namespace

void RunConfig::validate() const
{
    if (counties.empty())
    {
        throw ConfigError("no counties configured");
    }
    for (auto const& p : counties)
    {
        if (!fs::is_regular_file(p))
        {
            throw ConfigError("county spec not found: " + p.string());
        }
    }
    for (auto const& [id, p] : weather)
    {
        if (!fs::is_regular_file(p))
        {
            throw ConfigError("weather file for " + id + " not found: " + p.string());
        }
    }
    if ((dsm & ~7u) != 0)
    {
        throw ConfigError("unknown DSM bits");
    }
    if (dsm != 0 && scenario == ScenarioSelection::Bau)
    {
        throw ConfigError("DSM strategies apply to the all-electric scenario; use --scenario all-electric or both");
    }
    if (!adoption_sweep.empty() && scenario == ScenarioSelection::Bau)
    {
        throw ConfigError("an adoption sweep needs the all-electric scenario");
    }
    check_fraction(adoption, "adoption");
    check_fractions(adoption_sweep, "adoption sweep values");
    if (headroom_bau)
    {
        check_fraction(*headroom_bau, "headroom_bau");
    }
    check_fraction(headroom_future, "headroom_future");
    check_fractions(headroom_sweep_bau, "headroom sweep values");
    check_fractions(headroom_sweep_future, "headroom sweep values");
    if (headroom_sweep_bau.empty() != headroom_sweep_future.empty())
    {
        throw ConfigError("a headroom sweep needs both a bau and a future grid");
    }
    for (double r : discount_sweep)
    {
        if (!(r > -1.0) || !std::isfinite(r))
        {
            throw ConfigError("discount sweep rates must exceed -1");
        }
    }
    try
    {
        prices.validate();
    }
    catch (std::exception const& e)
    {
        throw ConfigError(std::string("prices: ") + e.what());
    }
    if (sample_size == 0)
    {
        throw ConfigError("sample_size must be positive");
    }
    if (monte_carlo_runs == 1)
    {
        throw ConfigError("monte_carlo_runs must be 0 or at least 2");
    }
    double const minutes = dt_hours * 60.0;
    if (!(dt_hours > 0.0 && dt_hours <= 1.0) || std::abs(minutes - std::round(minutes)) > 1e-9
        || std::fmod(60.0, std::round(minutes)) != 0.0)
    {
        throw ConfigError("dt must divide one hour into whole minutes");
    }
    if (jobs == 0)
    {
        throw ConfigError("jobs must be positive");
    }
}

std::string RunConfig::to_json() const
{
    json j;
    j["schema_version"] = kRunConfigSchemaVersion;
    j["counties"] = path_list(counties);
    json w = json::object();
    for (auto const& [id, p] : weather)
    {
        w[id] = p.generic_string();
    }
    j["weather"] = w;
    j["scenario"] = std::string(to_string(scenario));
    json d = json::array();
    for (unsigned bit : {kEnvelope, kGroundSource, kCoordinate})
    {
        if (dsm & bit)
        {
            d.push_back(bit == kEnvelope ? "envelope" : bit == kGroundSource ? "gshp" : "coordinate");
        }
    }
    j["dsm"] = d;
    j["dsm_report"] = dsm_report;
    j["sizing"] = std::string(to_string(sizing));
    j["night_setback"] = night_setback;
    j["hp_profile"] = std::string(to_string(hp_profile));
    j["adoption"] = adoption;
    j["adoption_sweep"] = adoption_sweep;
    j["headroom"] = {
        {"bau", headroom_bau ? json(*headroom_bau) : json(nullptr)},
        {"future", headroom_future},
        {"sweep_bau", headroom_sweep_bau},
        {"sweep_future", headroom_sweep_future},
    };
    j["discount_sweep"] = discount_sweep;
    j["prices"] = {
        {"capital_per_kW", prices.capital_per_kw},
        {"recurring_per_kW_year", prices.recurring_per_kw_year},
        {"inflation", prices.inflation},
        {"discount", prices.discount},
        {"horizon_years", prices.horizon_years},
        {"sigma_fraction", prices.price_sigma_fraction},
    };
    j["sample_size"] = sample_size;
    j["monte_carlo_runs"] = monte_carlo_runs;
    j["seed"] = seed;
    j["dt_hours"] = dt_hours;
    j["jobs"] = jobs;
    j["out"] = out_dir.generic_string();
    j["dump_lp"] = dump_lp;
    return j.dump(2);
}

namespace
{

template <class T>
T field(json const& j, char const* name, T fallback)
{
    auto const it = j.find(name);
    if (it == j.end() || it->is_null())
    {
        return fallback;
    }
    try
    {
        return it->get<T>();
    }
    catch (json::exception const&)
    {
        throw ConfigError(std::string("field '") + name + "' has the wrong type");
    }
}

std::vector<double> grid_field(json const& j, char const* name)
{
    auto const it = j.find(name);
    if (it == j.end() || it->is_null())
    {
        return {};
    }
    if (it->is_string())
    {
        return parse_grid(it->get<std::string>());
    }
    if (it->is_array())
    {
        std::vector<double> g;
        for (auto const& v : *it)
        {
            if (!v.is_number())
            {
                throw ConfigError(std::string("field '") + name + "' must hold numbers");
            }
            g.push_back(v.get<double>());
        }
        return g;
    }
    throw ConfigError(std::string("field '") + name + "' must be \"A:B:STEP\" or an array");
}

void reject_unknown(json const& j, std::set<std::string> const& known, std::string const& where)
{
    for (auto const& [k, v] : j.items())
    {
        if (!known.count(k))
        {
            throw ConfigError(where + ": unknown field '" + k + "'");
        }
    }
}

} // namespace

RunConfig load_run_config(fs::path const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError(path.string() + ": cannot open");
    }
    json j;
    try
    {
        in >> j;
    }
    catch (json::exception const& e)
    {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!j.is_object())
    {
        throw ConfigError(path.string() + ": top level must be an object");
    }
    try
    {
        reject_unknown(j,
            {"schema_version", "counties", "weather", "scenario", "dsm", "dsm_report", "sizing", "night_setback",
             "hp_profile", "adoption", "adoption_sweep", "headroom", "discount_sweep", "prices", "sample_size",
             "monte_carlo_runs", "seed", "dt_hours", "jobs", "out", "dump_lp", "description"},
            path.string());
        int const version = field(j, "schema_version", -1);
        if (version != kRunConfigSchemaVersion)
        {
            throw ConfigError(fmt::format("schema_version {} unsupported (expected {})", version, kRunConfigSchemaVersion));
        }
        fs::path const base = path.parent_path();
        auto resolve = [&](std::string const& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

        RunConfig c;
        for (auto const& p : field(j, "counties", std::vector<std::string>{}))
        {
            c.counties.push_back(resolve(p));
        }
        for (auto const& [id, p] : field(j, "weather", std::map<std::string, std::string>{}))
        {
            c.weather[id] = resolve(p);
        }
        c.scenario = parse_scenario_selection(field<std::string>(j, "scenario", "both"));
        for (auto const& f : field(j, "dsm", std::vector<std::string>{}))
        {
            c.dsm |= parse_dsm_flag(f);
        }
        c.dsm_report = field(j, "dsm_report", false);
        try
        {
            c.sizing = parse_sizing_rule(field<std::string>(j, "sizing", "max-of-both"));
        }
        catch (std::invalid_argument const& e)
        {
            throw ConfigError(e.what());
        }
        c.night_setback = field(j, "night_setback", false);
        c.hp_profile = parse_hp_profile(field<std::string>(j, "hp_profile", "cchp"));
        c.adoption = field(j, "adoption", 1.0);
        c.adoption_sweep = grid_field(j, "adoption_sweep");
        if (auto const h = j.find("headroom"); h != j.end())
        {
            if (!h->is_object())
            {
                throw ConfigError("field 'headroom' must be an object");
            }
            reject_unknown(*h, {"bau", "future", "sweep_bau", "sweep_future"}, "headroom");
            if (h->contains("bau") && !(*h)["bau"].is_null())
            {
                c.headroom_bau = field(*h, "bau", 0.0);
            }
            c.headroom_future = field(*h, "future", kFutureHeadroom);
            c.headroom_sweep_bau = grid_field(*h, "sweep_bau");
            c.headroom_sweep_future = grid_field(*h, "sweep_future");
        }
        c.discount_sweep = grid_field(j, "discount_sweep");
        auto const pr = j.find("prices");
        if (pr == j.end() || !pr->is_object())
        {
            throw ConfigError("field 'prices' is required");
        }
        reject_unknown(*pr,
            {"capital_per_kW", "recurring_per_kW_year", "inflation", "discount", "horizon_years", "sigma_fraction",
             "calibration"},
            "prices");
        if (!pr->contains("capital_per_kW") || !pr->contains("recurring_per_kW_year"))
        {
            throw ConfigError("prices need capital_per_kW and recurring_per_kW_year");
        }
        c.prices.capital_per_kw = field(*pr, "capital_per_kW", 0.0);
        c.prices.recurring_per_kw_year = field(*pr, "recurring_per_kW_year", 0.0);
        c.prices.inflation = field(*pr, "inflation", c.prices.inflation);
        c.prices.discount = field(*pr, "discount", c.prices.discount);
        c.prices.horizon_years = field(*pr, "horizon_years", c.prices.horizon_years);
        c.prices.price_sigma_fraction = field(*pr, "sigma_fraction", c.prices.price_sigma_fraction);
        c.sample_size = field<std::size_t>(j, "sample_size", c.sample_size);
        c.monte_carlo_runs = field<std::size_t>(j, "monte_carlo_runs", 0);
        c.seed = field<std::uint64_t>(j, "seed", c.seed);
        c.dt_hours = field(j, "dt_hours", c.dt_hours);
        c.jobs = field(j, "jobs", std::max(1u, std::thread::hardware_concurrency()));
        c.out_dir = resolve(field<std::string>(j, "out", "out"));
        c.dump_lp = field(j, "dump_lp", false);
        return c;
    }
    catch (ConfigError const& e)
    {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string fnv1a_hex(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text)
    {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::string config_hash(RunConfig const& config)
{
    json j = json::parse(config.to_json());
    j.erase("jobs");
    j.erase("out");
    return fnv1a_hex(j.dump());
}

double reinforcement_kw(double bau_peak99, double future_peak99, double headroom_bau, double headroom_future)
{
    return reinforcement_requirement(
               {}, GridCapacityEstimate{bau_peak99, headroom_bau}, GridCapacityEstimate{future_peak99, headroom_future})
        .g_kw;
}

double adoption_headroom(double fraction, double headroom_bau, double headroom_future)
{
    return headroom_bau + fraction * (headroom_future - headroom_bau);
}

namespace
{

double week_peak(AggregateProfile const& p)
{
    return peak99(p.total_kw);
}

/// Coordinate the week with the larger uncoordinated peak99, then the other
/// week only if its uncoordinated peak99 could still set the county peak.
ScenarioPeak coordinated_peak(
    Fleet const& fleet,
    SimWindow const& heating,
    SimWindow const& cooling,
    SimulationOptions const& sim,
    std::function<void(std::string const&, lp::Problem const&)> const& dump)
{
    ScenarioPeak out;
    CountyPeak unc = simulate_county(fleet, heating, cooling, sim);
    bool const heating_first = week_peak(unc.heating) >= week_peak(unc.cooling);
    SimWindow const* windows[2] = {&heating, &cooling};
    AggregateProfile* profiles[2] = {&out.peak.heating, &out.peak.cooling};
    out.peak.heating = unc.heating;
    out.peak.cooling = unc.cooling;
    char const* names[2] = {"heating", "cooling"};
    double coordinated_max = 0.0;
    for (int pass = 0; pass < 2; ++pass)
    {
        int const wk = heating_first == (pass == 0) ? 0 : 1;
        if (pass == 1 && week_peak(*profiles[wk]) <= coordinated_max)
        {
            out.notes.push_back(std::string(names[wk]) + " week not coordinated: uncoordinated peak99 below the coordinated "
                                + names[1 - wk] + " week");
            break;
        }
        CoordinationOptions opts;
        if (dump)
        {
            opts.on_program = [&](lp::Problem const& p) { dump(names[wk], p); };
        }
        CoordinationResult r = coordinate_fleet(fleet, *windows[wk], opts);
        for (auto const& n : r.notes)
        {
            out.notes.push_back(std::string(names[wk]) + " week: " + n);
        }
        *profiles[wk] = std::move(r.coordinated);
        coordinated_max = std::max(coordinated_max, week_peak(*profiles[wk]));
    }
    out.peak.peak99_kw = std::max(week_peak(out.peak.heating), week_peak(out.peak.cooling));
    return out;
}

std::string dsm_tag(unsigned mask)
{
    return mask == 0 ? "none" : strategy_label(mask);
}

} // namespace

CountyOutcome run_county(RunConfig const& config, fs::path const& county_path, unsigned jobs)
{
    CountyOutcome out;
    out.source = county_path.generic_string();
    CountySpec const spec = load_county(county_path);
    out.county_id = spec.county_id;
    out.true_household_count = spec.true_household_count;
    auto const wo = config.weather.find(spec.county_id);
    WeatherSeries const weather = load_weather(wo != config.weather.end() ? wo->second : spec.weather_ref);
    PeakWeeks const weeks = select_peak_weeks(weather);
    SimWindow const heating = make_window(weather, weeks.heating, config.dt_hours);
    SimWindow const cooling = make_window(weather, weeks.cooling, config.dt_hours);

    SynthesisOptions const synth{config.sample_size, config.sizing, config.hp_profile};
    SimulationOptions const sim{config.dt_hours, jobs};
    std::uint64_t const seed = county_seed(config.seed, spec.county_id);

    auto base_fleet = [&](Scenario s) {
        Fleet f = synthesize_fleet(spec, s, seed, synth);
        if (config.night_setback)
        {
            f = apply_night_setback(std::move(f), seed);
        }
        return f;
    };

    Fleet const bau_fleet = base_fleet(Scenario::Bau);
    out.bau = ScenarioPeak{simulate_county(bau_fleet, heating, cooling, sim), {}};
    out.headroom_bau = config.headroom_bau.value_or(bau_headroom(spec));

    bool const future_selected = config.scenario != ScenarioSelection::Bau;
    if (future_selected)
    {
        Fleet const ae_fleet = base_fleet(Scenario::AllElectric);
        auto evaluate = [&](unsigned mask, double fraction, bool dump) {
            Fleet f = fraction < 1.0 ? apply_adoption_rate(ae_fleet, fraction, seed) : ae_fleet;
            if (mask & kEnvelope)
            {
                f = apply_envelope_upgrade(std::move(f));
            }
            if (mask & kGroundSource)
            {
                f = apply_gshp(std::move(f));
            }
            if (!(mask & kCoordinate))
            {
                return ScenarioPeak{simulate_county(f, heating, cooling, sim), {}};
            }
            std::function<void(std::string const&, lp::Problem const&)> dumper;
            if (dump)
            {
                dumper = [&](std::string const& week, lp::Problem const& p) {
                    fs::path const dir = config.out_dir / "lp";
                    fs::create_directories(dir);
                    std::ofstream os(dir / (spec.county_id + "_" + week + ".mps"));
                    p.write_mps(os, spec.county_id + "_" + week);
                };
            }
            return coordinated_peak(f, heating, cooling, sim, dumper);
        };
        auto g_of = [&](ScenarioPeak const& p, double fraction) {
            return reinforcement_kw(out.bau->peak.peak99_kw, p.peak.peak99_kw, out.headroom_bau,
                adoption_headroom(fraction, out.headroom_bau, config.headroom_future));
        };

        out.future = evaluate(config.dsm, config.adoption, config.dump_lp);
        out.headroom_future = adoption_headroom(config.adoption, out.headroom_bau, config.headroom_future);
        out.g_kw = g_of(*out.future, config.adoption);

        for (double f : config.adoption_sweep)
        {
            out.adoption.emplace_back(f, g_of(evaluate(config.dsm, f, false), f));
        }
        if (config.dsm_report)
        {
            for (unsigned sub = config.dsm;; sub = (sub - 1) & config.dsm)
            {
                out.dsm_g_kw[sub] = sub == config.dsm ? out.g_kw : g_of(evaluate(sub, config.adoption, false), config.adoption);
                if (sub == 0)
                {
                    break;
                }
            }
        }
    }

    if (config.monte_carlo_runs > 0)
    {
        auto const seeds = run_seeds(seed, config.monte_carlo_runs);
        Scenario const s = future_selected ? Scenario::AllElectric : Scenario::Bau;
        out.monte_carlo = monte_carlo_peaks(spec, s, heating, cooling, seeds, synth, sim);
    }
    out.ok = true;
    return out;
}

std::size_t RunReport::failures() const
{
    return static_cast<std::size_t>(std::count_if(counties.begin(), counties.end(), [](auto const& c) { return !c.ok; }));
}

namespace
{

std::string num(double v)
{
    return fmt::format("{:.6f}", v);
}

class CsvWriter
{
  public:
    CsvWriter(fs::path path, std::vector<fs::path>& outputs)
        : path_(std::move(path)), os_(path_, std::ios::binary)
    {
        if (!os_)
        {
            throw std::runtime_error(path_.string() + ": cannot write");
        }
        outputs.push_back(path_);
    }

    template <class... A>
    void row(A const&... cells)
    {
        std::size_t i = 0;
        ((os_ << (i++ ? "," : "") << cells), ...);
        os_ << '\n';
    }

  private:
    fs::path path_;
    std::ofstream os_;
};

std::string cost_cells(CostEstimate const& c)
{
    return num(c.mean) + "," + num(c.ci95.first) + "," + num(c.ci95.second);
}

void write_profile(fs::path const& path, AggregateProfile const& p, std::vector<fs::path>& outputs)
{
    CsvWriter w(path, outputs);
    w.row("timestamp", "total_kW", "misc_kW", "water_kW", "ev_kW", "hvac_kW");
    for (std::size_t k = 0; k < p.size(); ++k)
    {
        w.row(format_timestamp(p.timestamps[k]), num(p.total_kw[k]), num(p.misc_kw[k]), num(p.water_kw[k]),
            num(p.ev_kw[k]), num(p.hvac_kw[k]));
    }
}

std::string utc_now()
{
    std::time_t const t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_outputs(RunConfig const& config, RunReport& report)
{
    fs::path const out = config.out_dir;
    fs::create_directories(out / "profiles");
    auto& files = report.outputs;
    bool const future = config.scenario != ScenarioSelection::Bau;
    bool const bau = config.scenario != ScenarioSelection::AllElectric;

    std::vector<CountyOutcome const*> ok;
    for (auto const& c : report.counties)
    {
        if (c.ok)
        {
            ok.push_back(&c);
        }
    }

    {
        CsvWriter diag(out / "diagnostics.csv", files);
        diag.row("county_id", "scenario", "week", "peak99_kW", "depleted_households", "comfort_violation_households",
            "backup_kWh");
        for (auto const* c : ok)
        {
            auto emit = [&](char const* scen, ScenarioPeak const& sp) {
                for (auto const& [week, prof] :
                    {std::pair<char const*, AggregateProfile const*>{"heating", &sp.peak.heating}, {"cooling", &sp.peak.cooling}})
                {
                    write_profile(out / "profiles" / (c->county_id + "_" + scen + "_" + week + ".csv"), *prof, files);
                    auto const& d = prof->diagnostics;
                    diag.row(c->county_id, scen, week, num(week_peak(*prof)), d.depleted_households,
                        d.comfort_violation_households, num(d.backup_kwh));
                }
            };
            if (bau)
            {
                emit("bau", *c->bau);
            }
            if (future)
            {
                emit("all-electric", *c->future);
            }
        }
    }

    if (future)
    {
        CsvWriter rf(out / "reinforcement.csv", files);
        rf.row("county_id", "bau_peak99_kW", "headroom_bau", "bau_capacity_kW", "future_peak99_kW", "headroom_future",
            "future_capacity_kW", "G_kW");
        CsvWriter cost(out / "costs.csv", files);
        cost.row("county_id", "G_kW", "cost_mean", "cost_lo95", "cost_hi95", "cost_per_household");
        double g_total = 0.0, households = 0.0;
        for (auto const* c : ok)
        {
            double const bp = c->bau->peak.peak99_kw;
            double const fp = c->future->peak.peak99_kw;
            rf.row(c->county_id, num(bp), num(c->headroom_bau), num(bp * (1.0 + c->headroom_bau)), num(fp),
                num(c->headroom_future), num(fp * (1.0 + c->headroom_future)), num(c->g_kw));
            CostEstimate const e = cost_distribution(c->g_kw, config.prices);
            cost.row(c->county_id, num(c->g_kw), cost_cells(e), num(e.mean / c->true_household_count));
            g_total += c->g_kw;
            households += c->true_household_count;
        }
        CostEstimate const e = cost_distribution(g_total, config.prices);
        cost.row("TOTAL", num(g_total), cost_cells(e), num(households > 0.0 ? e.mean / households : 0.0));

        if (!config.adoption_sweep.empty())
        {
            CsvWriter a(out / "adoption_sweep.csv", files);
            a.row("county_id", "adoption", "headroom_future", "G_kW", "cost_mean", "cost_lo95", "cost_hi95");
            std::vector<double> totals(config.adoption_sweep.size(), 0.0);
            for (auto const* c : ok)
            {
                for (std::size_t i = 0; i < c->adoption.size(); ++i)
                {
                    auto const [f, g] = c->adoption[i];
                    a.row(c->county_id, num(f), num(adoption_headroom(f, c->headroom_bau, config.headroom_future)),
                        num(g), cost_cells(cost_distribution(g, config.prices)));
                    totals[i] += g;
                }
            }
            for (std::size_t i = 0; i < totals.size(); ++i)
            {
                a.row("TOTAL", num(config.adoption_sweep[i]), "", num(totals[i]),
                    cost_cells(cost_distribution(totals[i], config.prices)));
            }
        }

        if (!config.headroom_sweep_bau.empty())
        {
            CsvWriter h(out / "headroom_sweep.csv", files);
            h.row("headroom_bau", "headroom_future", "G_kW", "cost_mean", "cost_lo95", "cost_hi95");
            for (double hb : config.headroom_sweep_bau)
            {
                for (double hf : config.headroom_sweep_future)
                {
                    double g = 0.0;
                    for (auto const* c : ok)
                    {
                        g += reinforcement_kw(c->bau->peak.peak99_kw, c->future->peak.peak99_kw, hb, hf);
                    }
                    h.row(num(hb), num(hf), num(g), cost_cells(cost_distribution(g, config.prices)));
                }
            }
        }

        if (!config.discount_sweep.empty())
        {
            CsvWriter d(out / "discount_sweep.csv", files);
            d.row("discount_rate", "cost_mean", "cost_lo95", "cost_hi95");
            for (auto const& p : discount_rate_sweep(g_total, config.prices, config.discount_sweep))
            {
                d.row(num(p.discount), cost_cells(p.cost));
            }
        }

        if (config.dsm_report)
        {
            CsvWriter d(out / "dsm.csv", files);
            d.row("county_id", "strategy", "G_kW", "cost_mean", "reduction_pct");
            std::map<unsigned, double> total_g;
            auto emit = [&](std::string const& id, std::map<unsigned, double> const& gs) {
                std::map<unsigned, double> costs;
                for (auto const& [mask, g] : gs)
                {
                    costs[mask] = npv_cost(g, config.prices);
                }
                for (auto const& r : dsm_cost_reduction_report(costs))
                {
                    d.row(id, dsm_tag(r.mask), num(gs.at(r.mask)), num(r.total_cost), num(r.reduction_pct));
                }
            };
            for (auto const* c : ok)
            {
                emit(c->county_id, c->dsm_g_kw);
                for (auto const& [mask, g] : c->dsm_g_kw)
                {
                    total_g[mask] += g;
                }
            }
            if (!ok.empty())
            {
                emit("TOTAL", total_g);
            }
        }
    }

    if (config.monte_carlo_runs > 0)
    {
        CsvWriter runs(out / "monte_carlo.csv", files);
        runs.row("county_id", "scenario", "run", "peak99_kW");
        CsvWriter sum(out / "monte_carlo_summary.csv", files);
        sum.row("county_id", "scenario", "runs", "mean_kW", "std_kW", "cv", "skewness");
        char const* scen = future ? "all-electric" : "bau";
        for (auto const* c : ok)
        {
            auto const& mc = *c->monte_carlo;
            for (std::size_t r = 0; r < mc.peaks_kw.size(); ++r)
            {
                runs.row(c->county_id, scen, r, num(mc.peaks_kw[r]));
            }
            sum.row(c->county_id, scen, mc.peaks_kw.size(), num(mc.mean), num(mc.std), num(mc.std / mc.mean),
                num(mc.skewness));
        }
    }

    std::string const cfg = config.to_json();
    json m;
    m["schema_version"] = kManifestSchemaVersion;
    m["software"] = {{"name", "gridimpact"}, {"version", GRIDIMPACT_VERSION}};
    m["seed"] = config.seed;
    m["config_hash"] = config_hash(config);
    m["config"] = json::parse(cfg);
    m["created"] = utc_now();
    json cs = json::array();
    for (auto const& c : report.counties)
    {
        json e{{"source", c.source}, {"status", c.ok ? "ok" : "failed"}};
        if (!c.county_id.empty())
        {
            e["county_id"] = c.county_id;
        }
        if (!c.ok)
        {
            e["error"] = c.error;
        }
        json notes = json::array();
        for (auto const* sp : {c.bau ? &*c.bau : nullptr, c.future ? &*c.future : nullptr})
        {
            if (sp)
            {
                for (auto const& n : sp->notes)
                {
                    notes.push_back(n);
                }
            }
        }
        e["notes"] = notes;
        cs.push_back(e);
    }
    m["counties"] = cs;
    json outs = json::array();
    for (auto const& p : files)
    {
        outs.push_back(fs::relative(p, out).generic_string());
    }
    m["outputs"] = outs;
    fs::path const mpath = out / "manifest.json";
    std::ofstream(mpath) << m.dump(2) << '\n';
    files.push_back(mpath);
}

} // namespace

RunReport run(RunConfig const& config)
{
    config.validate();
    RunReport report;
    std::size_t const n = config.counties.size();
    report.counties.resize(n);
    unsigned const workers = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(n)));
    unsigned const inner = std::max(1u, config.jobs / workers);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                report.counties[i] = run_county(config, config.counties[i], inner);
            }
            catch (std::exception const& e)
            {
                auto& c = report.counties[i];
                c = CountyOutcome{};
                c.source = config.counties[i].generic_string();
                c.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t)
    {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool)
    {
        t.join();
    }
    std::set<std::string> seen;
    for (auto& c : report.counties)
    {
        if (c.ok && !seen.insert(c.county_id).second)
        {
            c.ok = false;
            c.error = "duplicate county id " + c.county_id;
        }
    }
    write_outputs(config, report);
    return report;
}

} // namespace gridimpact
