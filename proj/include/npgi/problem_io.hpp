#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "npgi/problem.hpp"

namespace npgi {

// Problem file format (line oriented, '#' starts a comment line):
//
//   agents: 2
//   states: 8
//   actions: 2 2
//   observations: 4 4
//   horizon: 3
//   start: 0.125 0.125 ...
//   label state <s> <name>
//   label action <agent> <a> <name>
//   label observation <agent> <z> <name>
//   T: <joint action> : <s> : <s'> <prob>
//   O: <joint action> : <s'> : <joint obs> <prob>
//   R: linear <t> : <joint action> : <s> <value>
//   R: belief <t> negentropy|zero
//   R: cost <t> : <joint action> <value>
//   Rfinal: negentropy | zero | linear <one value per state>
//
// Joint actions and observations are written as one local index per agent.
// Any index, state or time step may be '*', which expands to every value.
// Unlisted probabilities are zero; later lines overwrite earlier ones.

/// Parses without checking probability invariants. Syntax and dimension
/// errors still throw ParseError.
Problem parse_problem_unchecked(std::string_view text);

/// Parses and validates. Throws ParseError or InvalidProblem.
Problem parse_problem(std::string_view text);
Problem parse_problem(std::istream& in);

std::string serialize_problem(const Problem& problem);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double x);

}  // namespace npgi
