#pragma once

#include "amhedge/market.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace amhedge {

using Json = nlohmann::ordered_json;

/// Rational from a JSON string ("p/q", canonical) or integer; `field`
/// names the location for diagnostics.
Rational rational_from_json(const Json& value, const std::string& field);
Json rational_to_json(const Rational& value);

/// Parses a problem document. Syntax errors report line and column;
/// schema errors name the offending field. Both throw ParseError.
Problem parse_problem(std::string_view text);
Problem load_problem(const std::filesystem::path& path);

Json problem_to_json(const Problem& problem);
/// Canonical serialization (two-space indent, trailing newline).
std::string dump_problem(const Problem& problem);

/// FNV-1a 64-bit digest of the canonical serialization, as 16 hex digits.
std::string problem_digest(const Problem& problem);

}  // namespace amhedge
