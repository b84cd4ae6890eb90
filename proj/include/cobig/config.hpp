#pragma once

#include "cobig/solver.hpp"

#include <map>
#include <string>

namespace cobig {

/// Flat "key = value" file. '#' starts a comment; blank lines are ignored.
using KeyValues = std::map<std::string, std::string>;

/// Throws ParseError (with line number) on a line without '=' or a repeated key.
KeyValues read_key_values(const std::string& path);

/// Applies one SolverConfig field. Returns false when the key is not a solver
/// field; throws std::invalid_argument on a malformed value.
///
/// Keys: sigma0 (number or "auto"), sigma_decay, max_iterations,
/// translation_tol, rotation_tol, k_neighbors, eps_plane, gate (number or
/// "adaptive"), pinv_tolerance.
bool apply_solver_key(SolverConfig& cfg, const std::string& key, const std::string& value);

/// Every key must be a solver field. The result is validated.
SolverConfig solver_config_from(const KeyValues& kv);

SolverConfig read_solver_config(const std::string& path);

/// Inverse of solver_config_from.
std::string format_solver_config(const SolverConfig& cfg);

double parse_double(const std::string& key, const std::string& value);
long long parse_integer(const std::string& key, const std::string& value);

} // namespace cobig
