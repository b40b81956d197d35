#pragma once

namespace ddc {

inline constexpr const char* kLibraryVersion = "1.0.0";

}  // namespace ddc
