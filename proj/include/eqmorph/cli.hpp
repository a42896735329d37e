#pragma once

namespace eqmorph {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBugs = 10;

/// The eqmorph command line: run, replay, gen. Returns the exit code.
int cli_main(int argc, char** argv);

}  // namespace eqmorph
