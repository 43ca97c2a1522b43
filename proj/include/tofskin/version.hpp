#pragma once

namespace tofskin {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "tofskin";

}  // namespace tofskin
