#pragma once

namespace lastexit {

inline constexpr const char* kVersion = "0.1.0";

} // namespace lastexit
