#ifndef ATTN_CLI_HPP
#define ATTN_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace attn::cli {

enum ExitCode : int { ok = 0, usage = 1, data_error = 2, io_error = 3 };

// Runs `attn <subcommand> [flags]`. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace attn::cli

#endif
