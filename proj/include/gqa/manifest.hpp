#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gqa/config.hpp"

namespace gqa {

// FNV-1a over the file's bytes, as zero-padded hex.
std::string file_digest(const std::string& path);

// Reproducibility record for a command run: the command, the full effective
// config plus its hash, the seed and a digest of each input file.
nlohmann::ordered_json manifest_json(const std::string& command, const RunConfig& cfg,
                                     const std::vector<std::string>& input_paths);

// Writes the record next to the command's outputs.
void write_manifest(const std::string& path, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::string>& input_paths);

}  // namespace gqa
