#pragma once

namespace dipcoal {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dipcoal
