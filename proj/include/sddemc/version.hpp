#pragma once

namespace sddemc {

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace sddemc
