#pragma once

namespace swarmsim {

inline constexpr const char* kVersion = "0.1.0";

}
