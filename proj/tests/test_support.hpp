#pragma once

#include "gridimpact/io.hpp"

#include <filesystem>

namespace testing_support
{

inline std::filesystem::path data_dir()
{
    return GRIDIMPACT_DATA_DIR;
}

inline gridimpact::CountySpec cold_county()
{
    static gridimpact::CountySpec const spec = gridimpact::load_county(data_dir() / "counties" / "cold.json");
    return spec;
}

inline gridimpact::CountySpec hot_humid_county()
{
    static gridimpact::CountySpec const spec =
        gridimpact::load_county(data_dir() / "counties" / "hot_humid.json");
    return spec;
}

} // namespace testing_support
