#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace mwtrap::report {

using Json = nlohmann::ordered_json;

/// Serializes with stable key order and every floating-point number formatted
/// at 12 significant digits, so identical inputs produce identical bytes.
std::string dump(const Json& j, int indent = 2);

/// FNV-1a 64-bit digest of a byte string, as 16 hex characters.
std::string digest(const std::string& bytes);

/// Digest of a file's contents.
std::string file_digest(const std::filesystem::path& path);

/// Skeleton report: command name, schema version, parameter echo, input
/// digests, results, and warnings, in that key order.
Json make_report(const std::string& command);

}  // namespace mwtrap::report
