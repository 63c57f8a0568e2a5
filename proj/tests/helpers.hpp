#pragma once

#include "slicemap/model.hpp"

#include <filesystem>
#include <vector>

namespace testing {

inline slicemap::VnfComponent comp(int id, double c, double s)
{
    return {id, slicemap::kind_for_position(id), c, s};
}

inline slicemap::VirtualMachine vm(int id, double c, double s)
{
    return {id, c, s, std::nullopt};
}

inline std::filesystem::path fixture(const char* name)
{
    return std::filesystem::path(SLICEMAP_FIXTURE_DIR) / name;
}

}  // namespace testing
