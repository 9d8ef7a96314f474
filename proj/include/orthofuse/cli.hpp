#ifndef ORTHOFUSE_CLI_HPP_
#define ORTHOFUSE_CLI_HPP_

#include <string>
#include <vector>

namespace orthofuse {

//! Subcommands: simulate, fit, weights, report.
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, const char* const* argv);

}  // namespace orthofuse

#endif  // ORTHOFUSE_CLI_HPP_
