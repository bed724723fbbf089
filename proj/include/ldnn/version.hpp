#pragma once

namespace ldnn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ldnn
