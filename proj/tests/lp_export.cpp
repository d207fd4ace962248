// Writes coordination programs as MPS next to this solver's optimal objective,
// for cross-checking with an external LP solver.
#include "gridimpact/dsm.hpp"
#include "gridimpact/io.hpp"
#include "small_instance.hpp"
#include "test_support.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iostream>

using namespace gridimpact;

namespace
{

void export_problem(lp::Problem const& p, std::filesystem::path const& path, std::ostream& index)
{
    std::ofstream out(path);
    p.write_mps(out);
    auto const s = lp::solve(p);
    index << fmt::format("{} {} {:.17g}\n", path.filename().string(), lp::to_string(s.status), s.objective);
}

} // namespace

int main(int argc, char** argv)
{
    if (argc != 2)
    {
        std::cerr << "usage: lp_export DIR\n";
        return 2;
    }
    std::filesystem::path const dir = argv[1];
    std::filesystem::create_directories(dir);
    std::ofstream index(dir / "objectives.txt");

    export_problem(to_lp(testing_support::small_coordination_problem()), dir / "small.mps", index);

    auto const spec = testing_support::cold_county();
    auto const weather = load_weather(testing_support::data_dir() / "weather" / "cold.csv");
    auto const weeks = select_peak_weeks(weather);
    SynthesisOptions o;
    o.sample_size = 4;
    auto const fleet = synthesize_fleet(spec, Scenario::AllElectric, 3, o);
    for (auto const& [name, week] : {std::pair{"heating", weeks.heating}, std::pair{"cooling", weeks.cooling}})
    {
        auto const w = make_window(weather, week, 0.5);
        std::vector<HouseholdTrace> traces;
        for (auto const& h : fleet.households)
        {
            traces.push_back(simulate_household(fleet, h, w));
        }
        auto const pb = build_coordination_problem(fleet, w, traces);
        export_problem(to_lp(pb), dir / fmt::format("fleet_{}.mps", name), index);
    }
    return 0;
}
