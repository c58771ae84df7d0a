#include "lacuna/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <vector>

#include "lacuna/errors.hpp"
#include "lacuna/jsonl.hpp"
#include "lacuna/version.hpp"

namespace lacuna {

namespace {

using DigestCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

DigestCtx new_sha256_ctx() {
    DigestCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: context initialization failed");
    }
    return ctx;
}

std::string finish_hex(DigestCtx& ctx) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw std::runtime_error("sha256: finalization failed");
    }
    std::string hex(2 * len, '0');
    static const char* alphabet = "0123456789abcdef";
    for (unsigned int i = 0; i < len; ++i) {
        hex[2 * i] = alphabet[digest[i] >> 4];
        hex[2 * i + 1] = alphabet[digest[i] & 0xf];
    }
    return hex;
}

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
    auto ctx = new_sha256_ctx();
    if (EVP_DigestUpdate(ctx.get(), data, size) != 1) {
        throw std::runtime_error("sha256: update failed");
    }
    return finish_hex(ctx);
}

std::string sha256_hex(const std::string& data) { return sha256_hex(data.data(), data.size()); }

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file for digest: " + path);
    auto ctx = new_sha256_ctx();
    std::vector<char> buffer(1 << 16);
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        const std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx.get(), buffer.data(),
                                        static_cast<std::size_t>(got)) != 1) {
            throw std::runtime_error("sha256: update failed");
        }
    }
    return finish_hex(ctx);
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buffer;
}

nlohmann::ordered_json to_json(const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["command"] = manifest.command;
    j["tool_version"] = manifest.tool_version.empty() ? kVersion : manifest.tool_version;
    j["config_digest"] = manifest.config_digest;
    j["seeds"] = manifest.seeds;
    j["input_digests"] = manifest.input_digests;
    j["output_digests"] = manifest.output_digests;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["failure_counts"] = manifest.failure_counts;
    return j;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    write_json_file(path, to_json(manifest));
}

std::vector<std::string> verify_manifest_digests(const std::string& path) {
    const auto j = read_json_file(path);
    std::vector<std::string> mismatched;
    for (const char* section : {"input_digests", "output_digests"}) {
        if (!j.contains(section)) continue;
        for (const auto& [file, digest] : j.at(section).items()) {
            try {
                if (sha256_file(file) != digest.get<std::string>()) mismatched.push_back(file);
            } catch (const ConfigError&) {
                mismatched.push_back(file);
            }
        }
    }
    return mismatched;
}

}  // namespace lacuna
