#pragma once

namespace dhvton {

inline constexpr const char* kVersion = "dhvton 0.1.0";

}  // namespace dhvton
