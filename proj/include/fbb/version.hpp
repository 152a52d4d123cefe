#pragma once

namespace fbb {
inline constexpr const char* kVersion = "1.0.0";
}
