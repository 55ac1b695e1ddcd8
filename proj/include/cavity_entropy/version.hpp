#pragma once

namespace cavity_entropy {
inline constexpr const char* kVersion = "0.1.0";
}
