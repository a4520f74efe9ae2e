#pragma once

namespace agricurate {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace agricurate
