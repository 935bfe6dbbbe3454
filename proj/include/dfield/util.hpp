#pragma once
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace dfield {

/// FNV-1a over bytes; used for config digests in provenance headers.
std::uint64_t fnv1a(std::string_view bytes);

std::string to_hex(std::uint64_t v);

/// Shortest round-trippable decimal text for a double (%.17g trimmed).
std::string format_double(double v);

/// Write-then-rename so partial runs never leave corrupt files behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

} // namespace dfield
