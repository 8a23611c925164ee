#pragma once

// Canonical JSON: sorted object keys, numbers in shortest round-trip form.

#include <string>
#include <string_view>

#include <json.hpp>

#include "lyacert/matrix_kernel.hpp"

namespace lyacert {

using Json = nlohmann::json;

/// Compact dump with sorted keys and shortest round-trip doubles. Non-finite
/// doubles are written as null.
std::string canonical_dump(const Json& value);

/// Parses text; throws ParseError with line/column on malformed input.
Json parse_json(std::string_view text);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Rows of finite doubles.
Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);

/// Throws ParseError naming `pointer` (a JSON pointer) on ragged rows,
/// non-numeric or non-finite entries.
Matrix matrix_from_json(const Json& value, const std::string& pointer);
Vector vector_from_json(const Json& value, const std::string& pointer);

/// Double from a number, or the strings "inf"/"Infinity".
double number_from_json(const Json& value, const std::string& pointer);

}  // namespace lyacert
