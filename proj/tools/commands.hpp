#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace monodromize::cli {

// Exit status of a run.
enum Status { Pass = 0, Fail = 1, CheckFailed = 2 };

// args excludes the program name. Results go to --out or `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace monodromize::cli
