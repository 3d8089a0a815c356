#pragma once

#include <cstdint>
#include <iosfwd>

namespace nlmc {

inline constexpr std::uint64_t kDefaultSeed = 0x5eed;

// Seed from NLMC_SEED when set and valid, otherwise kDefaultSeed.
std::uint64_t default_seed();

// Entry point of the nlmc tool. Returns the process exit code:
// 0 success, 2 validation, 3 non-convergence, 4 precondition, 5 solver failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlmc
