#pragma once

#include <stdexcept>
#include <string>

namespace lacuna {

// Configuration / usage problems (bad flag values, unparseable config,
// missing input files). The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent corpus input.
struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Transport or HTTP-level failure of a model backend.
struct BackendError : std::runtime_error {
    int status = 0;
    explicit BackendError(const std::string& msg) : std::runtime_error(msg) {}
    BackendError(const std::string& msg, int http_status)
        : std::runtime_error(msg), status(http_status) {}
};

// Well-formed transport but unusable payload (e.g. response is not the
// expected JSON shape). Never retried.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Constrained decoding cannot proceed (e.g. every word-initial subword
// is banned).
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scoring inputs disagree (prediction for an unknown key, unseen
// language, mismatched key spaces across runs).
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lacuna
