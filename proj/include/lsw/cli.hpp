#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lsw::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2 };

// Runs one subcommand: synth, rank, edit, dci, invert, render or eval.
// Returns 0 on success, 1 on validation or usage errors, 2 on I/O errors.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lsw::cli
