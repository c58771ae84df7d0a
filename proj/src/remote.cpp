#include <httplib.h>

#include "lacuna/remote.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "lacuna/errors.hpp"

namespace lacuna {

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_endpoint(const std::string& url) {
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint URL must include a scheme: " + url);
    }
    const std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string truncate_body(const std::string& body, std::size_t limit = 256) {
    if (body.size() <= limit) return body;
    return body.substr(0, limit) + "...";
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

RemoteBackendConfig RemoteBackendConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open remote backend config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("remote backend config " + path + " is not valid JSON: " + e.what());
    }
    RemoteBackendConfig cfg;
    try {
        cfg.endpoint = j.at("endpoint").get<std::string>();
        cfg.model = j.at("model").get<std::string>();
        cfg.auth_env = j.value("auth_env", std::string());
        cfg.timeout_s = j.value("timeout_s", cfg.timeout_s);
        cfg.max_retries = j.value("max_retries", cfg.max_retries);
        cfg.max_concurrent = j.value("max_concurrent", cfg.max_concurrent);
        cfg.backoff_base_ms = j.value("backoff_base_ms", cfg.backoff_base_ms);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("remote backend config " + path + ": " + e.what());
    }
    if (cfg.max_concurrent < 1) throw ConfigError("max_concurrent must be >= 1");
    return cfg;
}

std::string remote_complete(const RemoteBackendConfig& cfg, const std::string& prompt,
                            const SamplingParams& params) {
    if (prompt.empty()) throw ConfigError("remote_complete: prompt is empty");
    const ParsedUrl url = parse_endpoint(cfg.endpoint);

    nlohmann::json body = {
        {"model", cfg.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", params.temperature},
        {"max_tokens", params.max_new_tokens},
        {"stop", params.stop_sequences},
        {"seed", params.seed},
    };
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!cfg.auth_env.empty()) {
        const char* token = std::getenv(cfg.auth_env.c_str());
        if (token == nullptr || *token == '\0') {
            throw BackendError("auth token environment variable is not set: " + cfg.auth_env);
        }
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    std::string last_error;
    int last_status = 0;
    const std::size_t attempts = cfg.max_retries + 1;
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(cfg.backoff_base_ms << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(url.base);
        const auto timeout_ms = static_cast<std::uint64_t>(cfg.timeout_s * 1000.0);
        client.set_connection_timeout(std::chrono::milliseconds(timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(timeout_ms));

        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            last_status = 0;
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            nlohmann::json reply;
            try {
                reply = nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw ProtocolError(std::string("response is not valid JSON: ") + e.what() +
                                    "; body: " + truncate_body(res->body));
            }
            try {
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw ProtocolError(std::string("response missing choices[0].message.content: ") +
                                    e.what() + "; body: " + truncate_body(res->body));
            }
        }
        last_status = res->status;
        last_error = "HTTP " + std::to_string(res->status) + ": " + truncate_body(res->body);
        if (!retryable_status(res->status)) {
            throw BackendError(last_error, last_status);
        }
    }
    throw BackendError("request failed after " + std::to_string(attempts) +
                           " attempts; last error: " + last_error,
                       last_status);
}

// Counting gate bounding concurrent requests.
struct RemoteBackend::Gate {
    std::mutex mu;
    std::condition_variable cv;
    std::size_t available;

    explicit Gate(std::size_t n) : available(n) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return available > 0; });
        --available;
    }

    void release() {
        {
            std::lock_guard<std::mutex> lock(mu);
            ++available;
        }
        cv.notify_one();
    }
};

RemoteBackend::RemoteBackend(RemoteBackendConfig cfg)
    : cfg_(std::move(cfg)), gate_(new Gate(cfg_.max_concurrent < 1 ? 1 : cfg_.max_concurrent)) {}

RemoteBackend::~RemoteBackend() { delete gate_; }

std::string RemoteBackend::generate(const std::string& prompt, const SamplingParams& params) {
    gate_->acquire();
    try {
        std::string out = remote_complete(cfg_, prompt, params);
        gate_->release();
        return out;
    } catch (...) {
        gate_->release();
        throw;
    }
}

}  // namespace lacuna
