#pragma once

namespace subtext {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace subtext
