#include "gridimpact/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gridimpact
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

std::string trim(std::string_view s)
{
    auto const b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
    {
        return {};
    }
    auto const e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        auto const comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
        {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string slurp(fs::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw InputError(path.string() + ": cannot open");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Scalar JSON fields with the offending key named on error.
class Fields
{
  public:
    Fields(json const& j, std::string ctx) : j_(j), ctx_(std::move(ctx))
    {
        if (!j_.is_object())
        {
            fail("", "expected an object");
        }
    }

    [[noreturn]] void fail(std::string const& key, std::string const& what) const
    {
        throw InputError(ctx_ + (key.empty() ? "" : ": field '" + key + "'") + ": " + what);
    }

    bool has(std::string const& key) const { return j_.contains(key); }

    json const& at(std::string const& key) const
    {
        if (!j_.contains(key))
        {
            fail(key, "missing");
        }
        return j_.at(key);
    }

    double number(std::string const& key) const
    {
        json const& v = at(key);
        if (!v.is_number())
        {
            fail(key, "expected a number");
        }
        double const d = v.get<double>();
        if (!std::isfinite(d))
        {
            fail(key, "not finite");
        }
        return d;
    }

    double number(std::string const& key, double fallback) const
    {
        return has(key) ? number(key) : fallback;
    }

    std::string string(std::string const& key) const
    {
        json const& v = at(key);
        if (!v.is_string())
        {
            fail(key, "expected a string");
        }
        return v.get<std::string>();
    }

    Fields object(std::string const& key) const { return Fields(at(key), ctx_ + "." + key); }

  private:
    json const& j_;
    std::string ctx_;
};

} // namespace

std::size_t CsvTable::column(std::string_view name) const
{
    auto const it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
    {
        throw InputError(source + ": missing column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::string CsvTable::where(std::size_t row, std::size_t col) const
{
    return source + ": line " + std::to_string(line_numbers[row]) + ", column '" + header[col] + "'";
}

double CsvTable::number(std::size_t row, std::size_t col) const
{
    auto const& cells = rows[row];
    if (col >= cells.size() || cells[col].empty())
    {
        throw InputError(where(row, col) + ": missing value");
    }
    std::string const& s = cells[col];
    double v = 0.0;
    auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
    {
        throw InputError(where(row, col) + ": not a number: '" + s + "'");
    }
    if (!std::isfinite(v))
    {
        throw InputError(where(row, col) + ": non-finite value '" + s + "'");
    }
    return v;
}

CsvTable parse_csv(std::string_view text, std::string source)
{
    CsvTable t;
    t.source = std::move(source);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        auto const nl = text.find('\n', pos);
        std::string_view const raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        std::string const line = trim(raw);
        if (line.empty() || line.front() == '#')
        {
            continue;
        }
        auto cells = split(line);
        if (t.header.empty())
        {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
        {
            throw InputError(t.source + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
        t.line_numbers.push_back(line_no);
    }
    if (t.header.empty())
    {
        throw InputError(t.source + ": no header row");
    }
    return t;
}

CsvTable read_csv(fs::path const& path)
{
    return parse_csv(slurp(path), path.string());
}

Timestamp parse_timestamp(std::string_view s)
{
    std::string const str(s);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char sep = 0;
    int n = std::sscanf(str.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &sec);
    if (n < 6 || (sep != ' ' && sep != 'T'))
    {
        throw std::invalid_argument("bad timestamp '" + str + "'");
    }
    std::chrono::year_month_day const ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(mo)),
                                          std::chrono::day(static_cast<unsigned>(d))};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec != 0)
    {
        throw std::invalid_argument("bad timestamp '" + str + "'");
    }
    return std::chrono::sys_days(ymd) + std::chrono::hours(h) + std::chrono::minutes(mi);
}

std::string format_timestamp(Timestamp t)
{
    auto const day = std::chrono::floor<std::chrono::days>(t);
    std::chrono::year_month_day const ymd{day};
    auto const mins = (t - day).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(mins / 60), static_cast<int>(mins % 60));
    return buf;
}

namespace
{

// Uniform, strictly increasing timestamps; returns the spacing in hours.
std::vector<Timestamp> read_timestamps(CsvTable const& t, std::size_t col, double& step_hours)
{
    std::vector<Timestamp> ts;
    ts.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        try
        {
            ts.push_back(parse_timestamp(t.rows[r][col]));
        }
        catch (std::invalid_argument const& e)
        {
            throw InputError(t.where(r, col) + ": " + e.what());
        }
        if (r > 0 && ts[r] <= ts[r - 1])
        {
            throw InputError(t.where(r, col) + ": timestamp out of order");
        }
    }
    if (ts.size() < 2)
    {
        throw InputError(t.source + ": need at least two rows");
    }
    auto const step = ts[1] - ts[0];
    for (std::size_t r = 2; r < ts.size(); ++r)
    {
        if (ts[r] - ts[r - 1] != step)
        {
            throw InputError(t.where(r, col) + ": gap or irregular spacing (expected " +
                             std::to_string(step.count()) + " min, found " +
                             std::to_string((ts[r] - ts[r - 1]).count()) + " min)");
        }
    }
    step_hours = static_cast<double>(step.count()) / 60.0;
    return ts;
}

} // namespace

WeatherSeries parse_weather(CsvTable const& table)
{
    std::size_t const tc = table.column("timestamp");
    std::size_t const vc = table.column("outdoor_temp_C");
    WeatherSeries w;
    w.timestamps = read_timestamps(table, tc, w.step_hours);
    w.outdoor_c.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r)
    {
        w.outdoor_c.push_back(table.number(r, vc));
    }
    return w;
}

WeatherSeries load_weather(fs::path const& path)
{
    return parse_weather(read_csv(path));
}

PerformanceCurve load_curve(fs::path const& path)
{
    CsvTable const t = read_csv(path);
    std::size_t const tc = t.column("outdoor_temp_C");
    std::size_t const qc = t.column("capacity_kW");
    std::size_t const cc = t.column("cop");
    std::vector<CurveNode> nodes;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        nodes.push_back({t.number(r, tc), t.number(r, qc), t.number(r, cc)});
        if (r > 0 && !(nodes[r].outdoor_c > nodes[r - 1].outdoor_c))
        {
            throw InputError(t.where(r, tc) + ": temperatures must be strictly increasing");
        }
    }
    try
    {
        return PerformanceCurve(std::move(nodes));
    }
    catch (std::invalid_argument const& e)
    {
        throw InputError(t.source + ": " + e.what());
    }
}

TemperatureCurve load_multiplier_curve(fs::path const& path)
{
    CsvTable const t = read_csv(path);
    std::size_t const tc = t.column("outdoor_temp_C");
    std::size_t const mc = t.column("multiplier");
    std::vector<std::pair<double, double>> nodes;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        nodes.emplace_back(t.number(r, tc), t.number(r, mc));
        if (r > 0 && !(nodes[r].first > nodes[r - 1].first))
        {
            throw InputError(t.where(r, tc) + ": temperatures must be strictly increasing");
        }
    }
    try
    {
        return TemperatureCurve(std::move(nodes));
    }
    catch (std::invalid_argument const& e)
    {
        throw InputError(t.source + ": " + e.what());
    }
}

DailyProfile parse_daily_profile(CsvTable const& table)
{
    std::size_t const tc = table.column("timestamp");
    std::size_t const vc = table.column("value_kW");
    double step_hours = 0.0;
    auto const ts = read_timestamps(table, tc, step_hours);
    double const span = step_hours * static_cast<double>(ts.size());
    if (std::abs(span - 24.0) > 1e-9)
    {
        throw InputError(table.source + ": daily profile must cover exactly 24 h, covers " + std::to_string(span) + " h");
    }
    if (ts.front() != std::chrono::floor<std::chrono::days>(ts.front()))
    {
        throw InputError(table.where(0, tc) + ": daily profile must start at midnight");
    }
    std::vector<double> v;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
    {
        v.push_back(table.number(r, vc));
        if (v.back() < 0.0)
        {
            throw InputError(table.where(r, vc) + ": negative value");
        }
    }
    return DailyProfile(std::move(v));
}

DailyProfile load_daily_profile(fs::path const& path)
{
    return parse_daily_profile(read_csv(path));
}

std::vector<HousingArchetype> load_housing_mix(fs::path const& path)
{
    CsvTable const t = read_csv(path);
    std::size_t const type = t.column("type");
    std::size_t const wc = t.column("weight");
    std::size_t const ac = t.column("floor_area_m2");
    std::size_t const rc = t.column("resistance_C_per_kW");
    std::size_t const cc = t.column("capacitance_kWh_per_C");
    std::vector<HousingArchetype> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        HousingArchetype h;
        h.type = t.rows[r][type];
        h.weight = t.number(r, wc);
        h.floor_area_m2 = t.number(r, ac);
        h.resistance = t.number(r, rc);
        h.capacitance = t.number(r, cc);
        if (h.weight < 0.0)
        {
            throw InputError(t.where(r, wc) + ": negative weight");
        }
        if (h.resistance <= 0.0)
        {
            throw InputError(t.where(r, rc) + ": must be positive");
        }
        if (h.capacitance <= 0.0)
        {
            throw InputError(t.where(r, cc) + ": must be positive");
        }
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<CountProbability> load_vehicle_counts(fs::path const& path)
{
    CsvTable const t = read_csv(path);
    std::size_t const nc = t.column("vehicles");
    std::size_t const pc = t.column("probability");
    std::vector<CountProbability> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        double const n = t.number(r, nc);
        if (n < 0.0 || n != std::floor(n))
        {
            throw InputError(t.where(r, nc) + ": must be a non-negative integer");
        }
        out.push_back({static_cast<int>(n), t.number(r, pc)});
    }
    return out;
}

CountySpec load_county(fs::path const& path)
{
    json j;
    try
    {
        j = json::parse(slurp(path));
    }
    catch (json::parse_error const& e)
    {
        throw InputError(path.string() + ": " + e.what());
    }
    std::string const ctx = path.string();
    Fields const f(j, ctx);
    fs::path const dir = path.parent_path();
    auto const file = [&](Fields const& fl, std::string const& key) {
        fs::path p = fl.string(key);
        if (p.is_relative())
        {
            p = dir / p;
        }
        if (!fs::exists(p))
        {
            fl.fail(key, "file not found: " + p.string());
        }
        return p;
    };

    if (static_cast<int>(f.number("schema_version")) != kCountySchemaVersion)
    {
        f.fail("schema_version", "unsupported, expected " + std::to_string(kCountySchemaVersion));
    }

    CountySpec s;
    s.county_id = f.string("county_id");
    s.climate_zone = f.string("climate_zone");
    double const count = f.number("true_household_count");
    if (count < 1.0 || count != std::floor(count))
    {
        f.fail("true_household_count", "must be an integer >= 1");
    }
    s.true_household_count = static_cast<std::int64_t>(count);

    Fields const design = f.object("design_temperatures");
    s.design.heating_c = design.number("heating_99_C");
    s.design.cooling_c = design.number("cooling_1_C");

    s.housing_mix = load_housing_mix(file(f, "housing_mix"));
    s.envelope_sigma = f.number("envelope_sigma", s.envelope_sigma);
    s.vehicles_per_household = load_vehicle_counts(file(f, "vehicles_per_household"));
    s.large_vehicle_fraction = f.number("large_vehicle_fraction");
    Fields const commute = f.object("commute_km");
    s.commute_km_median = commute.number("median");
    s.commute_km_sigma = commute.number("sigma");

    if (f.has("bau_headroom_range"))
    {
        json const& hr = f.at("bau_headroom_range");
        if (!hr.is_array() || hr.size() != 2 || !hr[0].is_number() || !hr[1].is_number())
        {
            f.fail("bau_headroom_range", "expected [low, high]");
        }
        s.bau_headroom_range = {hr[0].get<double>(), hr[1].get<double>()};
    }

    Fields const bau = f.object("bau_shares");
    s.bau.resistance_heating = bau.number("resistance_heating");
    s.bau.heat_pump_heating = bau.number("heat_pump_heating");
    s.bau.air_conditioning = bau.number("air_conditioning");
    s.bau.electric_water_heating = bau.number("electric_water_heating");
    s.bau.electric_vehicles = bau.number("electric_vehicles");
    s.heat_pump_water_heater_fraction = f.number("heat_pump_water_heater_fraction");

    Fields const sp = f.object("setpoints");
    Fields const heat = sp.object("heating");
    Fields const cool = sp.object("cooling");
    s.heat_setpoint = {heat.number("mean"), heat.number("sd")};
    s.cool_setpoint = {cool.number("mean"), cool.number("sd")};

    s.misc_load = load_daily_profile(file(f, "misc_load"));
    s.hot_water_draw = load_daily_profile(file(f, "hot_water_draw"));
    s.load_scale_sigma = f.number("load_scale_sigma", s.load_scale_sigma);

    Fields const curves = f.object("curves");
    s.equipment.heat_pump_today = {load_curve(file(curves, "today_heating")), load_curve(file(curves, "today_cooling"))};
    s.equipment.heat_pump_cold_climate = {load_curve(file(curves, "cold_climate_heating")),
                                          load_curve(file(curves, "cold_climate_cooling"))};
    s.equipment.ev_consumption_multiplier = load_multiplier_curve(file(curves, "ev_consumption"));

    if (f.has("vehicles"))
    {
        Fields const v = f.object("vehicles");
        auto const cls = [&](std::string const& key, VehicleClass& out) {
            if (!v.has(key))
            {
                return;
            }
            Fields const c = v.object(key);
            out.battery_kwh = c.number("battery_kWh");
            out.kwh_per_km = c.number("kWh_per_km");
            out.charger_kw = c.number("charger_kW");
            if (out.battery_kwh <= 0.0 || out.kwh_per_km <= 0.0 || out.charger_kw < 0.0)
            {
                c.fail("", "battery, consumption must be positive and charger non-negative");
            }
        };
        cls("small", s.equipment.small_vehicle);
        cls("large", s.equipment.large_vehicle);
        s.equipment.ev_charge_efficiency = v.number("charge_efficiency", s.equipment.ev_charge_efficiency);
        s.equipment.ev_dissipation_per_h = v.number("dissipation_per_h", s.equipment.ev_dissipation_per_h);
    }

    s.weather_ref = file(f, "weather");

    try
    {
        s.validate();
    }
    catch (std::invalid_argument const& e)
    {
        throw InputError(ctx + ": " + e.what());
    }
    return s;
}

} // namespace gridimpact
