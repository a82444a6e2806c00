#pragma once

#include <filesystem>
#include <string>

#include "shipbow/pipeline.hpp"

namespace shipbow {

/// Single-file archive: "SHIPBOW\0", u32 entry count, then per entry
/// u32 name length, name, u64 payload length, payload. All integers are
/// little-endian. Entries are manifest.json, codebook.bin and svm.json.
std::string serialize_bundle(const ModelBundle& bundle);

/// Throws BundleFormatInvalid on a malformed archive or an unknown major version.
ModelBundle deserialize_bundle(const std::string& bytes);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
/// Throws FileNotFound, BundleFormatInvalid.
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace shipbow
