#pragma once

// Command-line front end: run, check-revealing, solve-nf, gen-env,
// regret-report.

namespace pomg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFault = 1;
inline constexpr int kExitConfig = 2;

int cli_main(int argc, char** argv);

}  // namespace pomg
