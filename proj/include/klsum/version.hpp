#pragma once

namespace klsum {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace klsum
