#pragma once

namespace driftlab {

inline constexpr const char* kToolName = "driftlab";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace driftlab
