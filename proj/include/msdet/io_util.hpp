#pragma once

#include <string>

namespace msdet {

/// Reads a whole file into memory; throws IoError on failure.
std::string read_file(const std::string& path);

/// Writes via a sibling temp file and renames into place, so a failed
/// write never leaves a partial output behind.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace msdet
