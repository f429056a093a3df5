#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deconvq {

//! Runs the command line `args` (without the program name). Results go to
//! `out`; failures print a JSON error object to `err` and return nonzero.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace deconvq
