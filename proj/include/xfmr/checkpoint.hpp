#pragma once

#include <filesystem>
#include <string>

#include "xfmr/pinn.hpp"

namespace xfmr {

inline constexpr const char* kCheckpointFormat = "xfmr-pinn-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// JSON text holding the format tag and version, network dimensions,
/// physics parameters, scaler constants and the flat parameter vector.
std::string checkpoint_to_string(const PinnModel& model);
PinnModel checkpoint_from_string(const std::string& text);

/// Writes to a temporary sibling file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const PinnModel& model);
PinnModel load_checkpoint(const std::filesystem::path& path);

/// Atomic text file write (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace xfmr
