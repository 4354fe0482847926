#pragma once

namespace potentia {

inline constexpr const char kVersion[] = "0.1.0";

}  // namespace potentia
