#ifndef SATEMU_TOOLS_CLI_H_
#define SATEMU_TOOLS_CLI_H_

#include <iosfwd>

namespace satemu::cli {

// Entry point for the `satemu` command. Returns the process exit status:
// 0 on success, 1 on a module error, CLI11's code on a usage error.
int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace satemu::cli

#endif  // SATEMU_TOOLS_CLI_H_
