#pragma once

namespace fsp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fsp
