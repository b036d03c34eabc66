#pragma once

namespace projgeo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace projgeo
