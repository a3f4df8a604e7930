#pragma once

#define TREEOT_VERSION_MAJOR 1
#define TREEOT_VERSION_MINOR 0
#define TREEOT_VERSION_PATCH 0

namespace treeot {

inline constexpr const char* version_string = "1.0.0";

}  // namespace treeot
