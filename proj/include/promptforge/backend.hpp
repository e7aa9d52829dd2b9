#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "promptforge/sigcore.hpp"

namespace promptforge {

enum class BackendErrorKind { ContentFiltered, Transport, Provider };

const char* backend_error_kind_name(BackendErrorKind kind);

struct BackendError {
    BackendErrorKind kind = BackendErrorKind::Transport;
    std::string detail;
};

struct Usage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
    bool operator==(const Usage&) const = default;
};

// Generation parameters sent with every request.
struct GenParams {
    std::string model;
    double temperature = 0.0;
    int max_tokens = 1024;
    int n = 1;  // parallel generations
    std::optional<long> seed;

    void validate() const;
};

// Exactly one of texts/error; |texts| == n on success.
struct CompletionResult {
    std::variant<std::vector<std::string>, BackendError> payload;
    Usage usage;

    bool ok() const { return std::holds_alternative<std::vector<std::string>>(payload); }
    const std::vector<std::string>& texts() const { return std::get<std::vector<std::string>>(payload); }
    const BackendError& error() const { return std::get<BackendError>(payload); }

    static CompletionResult success(std::vector<std::string> texts, Usage usage = {});
    static CompletionResult failure(BackendErrorKind kind, std::string detail, Usage usage = {});
};

// Canonical 256-bit fingerprint of (messages, model, temperature, max_tokens,
// n, seed), as 64 lowercase hex chars. Equal requests hash equal; any field
// change (including message order) changes the hash.
std::string request_fingerprint(const ChatMessages& messages, const GenParams& params);

// Uniform LM access. Implementations must be safe to share across concurrent
// evaluation workers.
class Backend {
  public:
    virtual ~Backend() = default;
    virtual CompletionResult complete(const ChatMessages& messages, const GenParams& params) = 0;
    // Whether one request with n > 1 returns n generations.
    virtual bool supports_batch_n() const { return true; }
};

// Deterministic rule table for tests and offline runs. Rules are matched in
// declaration order against the concatenated message contents; first match
// wins; the fallback response guarantees totality. A rule with several
// responses cycles through them across generations (and across sequential
// calls), which keeps batched and per-call voting paths equivalent.
struct ScriptedRule {
    std::string contains;
    std::vector<std::string> responses;
    std::optional<BackendError> error;
};

class ScriptedBackend : public Backend {
  public:
    ScriptedBackend(std::vector<ScriptedRule> rules, std::string fallback_response,
                    bool batch_n = true);

    CompletionResult complete(const ChatMessages& messages, const GenParams& params) override;
    bool supports_batch_n() const override { return batch_n_; }

  private:
    std::vector<ScriptedRule> rules_;
    std::string fallback_;
    bool batch_n_;
    std::vector<std::unique_ptr<std::atomic<uint64_t>>> cursors_;
};

// Raw HTTP exchange, injectable so retry and error mapping are testable
// without a network.
class Transport {
  public:
    struct Response {
        bool connected = false;  // false -> connection-level failure
        int status = 0;
        std::string body;
    };

    virtual ~Transport() = default;
    virtual Response post(const std::string& url, const std::string& bearer_token,
                          const std::string& json_body) = 0;
};

std::unique_ptr<Transport> make_http_transport(int timeout_seconds = 120);

struct HttpOptions {
    std::string base_url;  // falls back to PROMPTFORGE_BASE_URL
    std::string api_key;   // falls back to PROMPTFORGE_API_KEY
    int max_attempts = 3;
    int backoff_base_ms = 500;  // doubled per attempt
    int timeout_seconds = 120;
};

// OpenAI-compatible chat-completions client. Provider refusals flagged as
// content filtering map to ContentFiltered and are never retried; transient
// transport failures are retried with exponential backoff.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(HttpOptions options, std::unique_ptr<Transport> transport = nullptr);

    CompletionResult complete(const ChatMessages& messages, const GenParams& params) override;

  private:
    HttpOptions options_;
    std::unique_ptr<Transport> transport_;
};

enum class ReplayMode { Record, Replay, Off };

// Fingerprint-keyed completion cache. Replay mode resolves purely from the
// cache and never touches the inner backend; record mode serves hits from the
// cache and appends misses to the JSONL cache file. Only successes and
// content-filter results are cached (they are deterministic policy outcomes);
// transport and provider errors are not.
class ReplayBackend : public Backend {
  public:
    ReplayBackend(std::shared_ptr<Backend> inner, std::string cache_path, ReplayMode mode);

    CompletionResult complete(const ChatMessages& messages, const GenParams& params) override;
    bool supports_batch_n() const override;
    size_t entry_count() const;

  private:
    std::shared_ptr<Backend> inner_;
    std::string cache_path_;
    ReplayMode mode_;
    mutable std::mutex mutex_;
    std::vector<std::pair<std::string, CompletionResult>> entries_;  // insertion order
    const CompletionResult* lookup_locked(const std::string& fingerprint) const;
};

}  // namespace promptforge
