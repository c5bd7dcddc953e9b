#pragma once

namespace rase {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kConfigFormatVersion = 1;

}  // namespace rase
