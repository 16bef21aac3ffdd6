#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mfwidth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;

// Entry point shared by the mfwidth binary and the tests. args excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace mfwidth::cli
