#pragma once

namespace ztopo {

inline constexpr const char* version = "0.1.0";

}  // namespace ztopo
