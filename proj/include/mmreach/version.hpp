#pragma once

namespace mmreach {

inline constexpr const char* kToolVersion = "mmreach 0.1.0";

}  // namespace mmreach
