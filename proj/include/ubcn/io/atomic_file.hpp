#pragma once

#include <filesystem>
#include <string>

namespace ubcn::io {

/// Writes `content` to a sibling temporary file and renames it over `path`, so
/// readers never observe a partial file. Missing parent directories are created.
/// Throws on I/O failure.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ubcn::io
