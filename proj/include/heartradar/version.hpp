#pragma once

namespace heartradar {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace heartradar
