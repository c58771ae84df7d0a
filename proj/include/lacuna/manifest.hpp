#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lacuna {

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& data);
// Streaming digest; throws ConfigError if the file cannot be read.
std::string sha256_file(const std::string& path);

std::string iso8601_utc_now();

// Reproducibility record written next to every run's outputs. Input and
// output digests chain runs together: a later stage's input digest must
// equal the earlier stage's output digest.
struct RunManifest {
    std::string command;
    std::string tool_version;
    std::string config_digest;  // empty when the stage takes no config file
    std::map<std::string, std::uint64_t> seeds;
    std::map<std::string, std::string> input_digests;   // path -> sha256
    std::map<std::string, std::string> output_digests;  // path -> sha256
    std::string started_at;
    std::string finished_at;
    std::map<std::string, std::uint64_t> failure_counts;
};

nlohmann::ordered_json to_json(const RunManifest& manifest);
void write_manifest(const std::string& path, const RunManifest& manifest);

// Re-digests every file referenced by the manifest JSON at `path` and
// returns the mismatched paths (empty = chain verified).
std::vector<std::string> verify_manifest_digests(const std::string& path);

}  // namespace lacuna
