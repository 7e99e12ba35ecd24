#pragma once

namespace mixlit {

inline constexpr const char* kVersion = "0.3.0";

} // namespace mixlit
