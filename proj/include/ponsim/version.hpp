#pragma once

namespace ponsim {

inline constexpr const char* kVersion = "0.1.0";

} // namespace ponsim
