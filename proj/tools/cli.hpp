#pragma once

#include <iosfwd>

namespace shiftdiv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitInternal = 2;

// Entry point behind the shiftdiv binary. Results go to `out`, diagnostics to
// `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shiftdiv::cli
