#pragma once

namespace cpscan {

inline constexpr const char* version = "0.1.0";

} // namespace cpscan
