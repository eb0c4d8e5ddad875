#pragma once

#include <string_view>

namespace cvnet {

inline constexpr std::string_view kLibraryName = "cvnet";
inline constexpr std::string_view kVersion = "1.0.0";

}  // namespace cvnet
