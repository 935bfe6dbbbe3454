#pragma once
#include <filesystem>

#include "dfield/recording.hpp"

namespace dfield {

/// Writes 32-bit float PCM WAV, channel order = mic index order. The write is
/// atomic (temp file + rename). A sidecar `<path>.json` with the recording's
/// meta blob is written alongside when meta is non-empty.
void write_wav(const std::filesystem::path& path, const Recording& rec);

/// Reads 32-bit float or 16-bit integer PCM WAV. Loads the sidecar meta when
/// present.
Recording read_wav(const std::filesystem::path& path);

} // namespace dfield
