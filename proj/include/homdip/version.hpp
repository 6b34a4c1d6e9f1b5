#pragma once

namespace homdip {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace homdip
