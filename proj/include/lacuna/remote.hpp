#pragma once

#include <cstdint>
#include <string>

#include "lacuna/backend.hpp"

namespace lacuna {

struct RemoteBackendConfig {
    std::string endpoint;       // full URL including path, e.g. http://host:8000/v1/chat/completions
    std::string model;          // model name sent in the request body
    std::string auth_env;       // environment variable holding the bearer token; empty = no auth
    double timeout_s = 30.0;
    std::size_t max_retries = 3;
    std::size_t max_concurrent = 4;
    std::uint64_t backoff_base_ms = 250;  // doubled per retry

    static RemoteBackendConfig from_json_file(const std::string& path);
};

// Sends one chat-completion request; retries with exponential backoff on
// 429/5xx and transport failures, fails fast on other statuses. A malformed
// response body is a ProtocolError and is not retried.
std::string remote_complete(const RemoteBackendConfig& cfg, const std::string& prompt,
                            const SamplingParams& params);

class RemoteBackend final : public TextBackend {
public:
    explicit RemoteBackend(RemoteBackendConfig cfg);
    ~RemoteBackend() override;

    std::string generate(const std::string& prompt, const SamplingParams& params) override;
    std::string id() const override { return "remote:" + cfg_.model; }

    const RemoteBackendConfig& config() const { return cfg_; }

private:
    RemoteBackendConfig cfg_;
    struct Gate;
    Gate* gate_;  // bounds in-flight requests to cfg_.max_concurrent
};

}  // namespace lacuna
