#pragma once

namespace aerialtwin {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace aerialtwin
