#pragma once

namespace rotor {

inline constexpr const char* version = "0.1.0";

} // namespace rotor
