#pragma once

namespace marginal_lab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace marginal_lab
