#pragma once
#include <string>
#include <vector>

namespace cryomap {

// Command-line entry point. Subcommands: phantom, simulate, refine,
// reconstruct, fsc, sweep. Returns 0 on success, 1 on validation/usage
// errors, 2 on I/O errors. All randomized steps take --seed; identical
// arguments and seed produce byte-identical output files.
int cli_main(int argc, const char* const* argv);

// Convenience overload for in-process tests; args excludes the program name.
int cli_main(const std::vector<std::string>& args);

} // namespace cryomap
