#pragma once

#include <string>

namespace vbs {

inline constexpr const char* kVersion = "0.1.0";

// Multi-line version report: tool version, capacity-table hash, kernel ISA.
std::string version_report();

}  // namespace vbs
