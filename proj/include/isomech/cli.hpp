#pragma once

// Command-line front end. Subcommands: fit, truthfulness, estimation, minimax,
// icml, synthetic, check-majorization, replay.
//
// Exit codes: 0 success, 1 computation failure, 2 input validation failure.

#include <iosfwd>
#include <string>
#include <vector>

#include "isomech/expfam.hpp"

namespace isomech {

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

/// "gaussian[:variance]", "binomial:m", "poisson", "gamma:m".
Family parse_family_spec(const std::string& spec);

/// "a,b,c" or an inclusive range "start:stop[:step]".
std::vector<int> parse_int_list(const std::string& spec);
std::vector<double> parse_double_list(const std::string& spec);

}  // namespace isomech
