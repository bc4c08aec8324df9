#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace fairgauge {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Everything needed to reproduce a run byte-identically (the timestamp is
/// informational and excluded from determinism guarantees).
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;   // resolved flag values
    std::map<std::string, std::string> input_digests;  // path -> fnv1a64 hex
    std::uint64_t master_seed = 0;
    std::string version = kToolkitVersion;
    std::string timestamp;  // ISO 8601 UTC
};

/// FNV-1a 64-bit digest of a file's bytes, hex-encoded.
std::string file_digest(const std::string& path);

std::string current_utc_timestamp();

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace fairgauge
