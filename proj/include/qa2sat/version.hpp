#pragma once

namespace qa2sat {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qa2sat
