#pragma once

#include <filesystem>
#include <string>

#include "msftgcn/model.hpp"

namespace msftgcn {

// A checkpoint is a JSON manifest plus a payload file of concatenated TNS1
// records. The manifest lists name, byte offset, byte length and dims of each
// parameter, and the payload file name relative to the manifest.
// Writes <manifest> and <manifest stem>.tns next to it.
void save_checkpoint(const std::filesystem::path& manifest, const ModelParams& params,
                     const std::string& config_hash);

// Loads into the layout of `expected` (names and dims must match); throws
// ConfigError naming both dim sets on a mismatch.
ModelParams load_checkpoint(const std::filesystem::path& manifest, const ModelParams& expected);

}  // namespace msftgcn
