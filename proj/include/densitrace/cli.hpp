#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace densitrace {

/// Entry point of the `densitrace` tool. Exit codes: 0 success, 1 usage
/// error (usage text on `err`), 2 data error ("Kind: detail" on `err`).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace densitrace
