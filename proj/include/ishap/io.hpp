#pragma once

#include <string>

#include "ishap/shapley.hpp"
#include "json.hpp"

namespace ishap {

// Serializes with stable bytes: floats as %.17g (lossless round trip),
// integers verbatim, two-space indentation, keys in insertion order.
// Serializing, parsing, and serializing again reproduces the same bytes.
std::string dump_json(const nlohmann::ordered_json& doc);

// %.17g rendering of one double (shared by JSON and CSV emitters).
std::string format_g17(double v);

nlohmann::ordered_json explanation_to_json(const Explanation& explanation);

// Writes via a temp file in the same directory plus rename, so readers never
// observe a partial file.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace ishap
